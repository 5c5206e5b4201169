pub mod interval_fuzz;
