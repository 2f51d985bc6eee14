//! The teach loop: run a directory through the converter, collect residual
//! errors, take expert demonstrations, preview the induced rule, and accept or
//! reject it.

mod report;
mod state;

pub use report::{
    output_files, write_output, MigrationReport, SegmentVerification, SessionStore,
    VerificationSummary,
};
pub use state::{
    convert_segment, run_migration, segment_file, session_id_for, ConvertedBy, Event, IoFailure,
    PendingDemo, PreviewSite, RulePreview, SegmentResult, SessionState,
};
