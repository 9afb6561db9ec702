//! Audits of the structure/noise expansion of powered block matrices, and
//! brute-force oracles for the monomial and random-partition arguments.

pub mod audits;
pub mod decompose;
pub mod encoding;
pub mod oracles;
pub mod record;

pub use audits::{
    audit_entry_bound_ltr, audit_entry_bound_rtl, audit_projection_scaling, EntryAudit, Envelope,
    ProjectionScaling,
};
pub use decompose::{audit_norm_lemmas, decompose_terms, DecompositionTerms, NormAudit, NormBars};
pub use encoding::{encode_index_list, enumerate_encodings, EncodingClass};
pub use oracles::{
    class_sum, group_sum_oracle, partition_unbiasedness_check, partition_unbiasedness_sampled,
    GroupSums, PartitionCheck, MAX_MONOMIALS, MAX_PARTITIONS,
};
pub use record::AuditRecord;
