//! Uniformly integrable embeddings. Small supports are decided by base-4
//! digit criteria; general bounded supports use stopping matrices.

mod digits;
mod ifs;
mod matrix;
mod oracle;

pub use digits::{
    classify_s, classify_s3, s3_boundary, s3_measure, S3Digits, S3Site, S3Verdict, SVerdict,
};
pub use ifs::{
    ifs_approximate, s_membership_via_ifs, IfsApproximation, IfsSystem, IfsVerdict, IntervalUnion,
    RBox,
};
pub use matrix::{
    search_matrix, verify_matrix, verify_matrix_with, MatrixRow, MatrixSearch, MatrixVerdict,
    PathCountState, RowTail, StoppingMatrix, Violation, ViolationKind, DEFAULT_VERIFY_STAGES,
};
pub use oracle::{brute_force_oracle, OracleSet, MAX_ORACLE_HORIZON};
