pub mod cluster;
pub mod cost;
pub mod run;

/// Command failures mapped onto process exit codes.
#[derive(Debug)]
pub enum CmdError {
    /// Bad input or configuration: exit code 2.
    Config(String),
    /// Failure while executing: exit code 3.
    Runtime(String),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Config(_) => 2,
            CmdError::Runtime(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CmdError::Config(msg) | CmdError::Runtime(msg) => msg,
        }
    }
}
