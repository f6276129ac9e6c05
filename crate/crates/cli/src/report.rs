//! Tab-separated rendering of the fixed reports.

use std::fmt::Write as _;

use mediacube::analytics::{
    context_by_social_class, document_importance, usage_evolution, usage_type_ratio, user_interest,
    AnalyticsError,
};
use mediacube::CatalogSnapshot;

use crate::ReportKind;

pub fn render(s: &CatalogSnapshot, kind: &ReportKind) -> Result<String, AnalyticsError> {
    let mut out = String::new();
    match kind {
        ReportKind::Importance => {
            out.push_str("doc\tcount\n");
            for (code, n) in document_importance(s) {
                let _ = writeln!(out, "{code}\t{n}");
            }
        }
        ReportKind::Interest { user } => {
            let interest = user_interest(s, user)?;
            out.push_str("dimension\tvalue\tcount\n");
            for (context, n) in &interest.contexts {
                let _ = writeln!(out, "context\t{context}\t{n}");
            }
            for (code, n) in &interest.documents {
                let _ = writeln!(out, "doc\t{code}\t{n}");
            }
        }
        ReportKind::Evolution { granularity } => {
            out.push_str("time\tcount\n");
            for (bucket, n) in usage_evolution(s, *granularity) {
                let _ = writeln!(out, "{bucket}\t{n}");
            }
        }
        ReportKind::UsageTypes => {
            let r = usage_type_ratio(s);
            let _ = write!(
                out,
                "use_type\tcount\nrepetitive\t{}\noccasional\t{}\n",
                r.repetitive, r.occasional
            );
        }
        ReportKind::SocialClasses => {
            out.push_str("social_class\tcontext\tcount\n");
            for ((class, context), n) in context_by_social_class(s) {
                let _ = writeln!(out, "{class}\t{context}\t{n}");
            }
        }
    }
    Ok(out)
}
