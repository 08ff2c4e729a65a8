pub mod config;
pub mod experiments;
pub mod metrics;
pub mod nrtclient;
pub mod perception;
pub mod protocol;
pub mod rtcontrol;
pub mod scene;
pub mod session;
pub mod simkit;
pub mod trajmath;
