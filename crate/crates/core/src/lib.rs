pub mod channel;
pub mod classical;
pub mod exponents;
pub mod hermitian;
pub mod optimize;
pub mod srm;

#[cfg(test)]
mod test_support;
