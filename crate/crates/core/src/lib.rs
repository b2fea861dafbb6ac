pub mod experiment;
pub mod hilbert;
pub mod verify;
pub mod wavepacket;
