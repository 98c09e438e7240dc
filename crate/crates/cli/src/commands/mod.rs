pub mod converge_pairing;
pub mod gmc_spectrum;
pub mod kernel_table;
pub mod sample;
pub mod selfcheck;
