//! `riverhelm validate`: diagnostics for one MDL file.

use std::path::Path;

use riverhelm_core::mdl::{parse_mdl_bytes, MdlError};

/// Exit code 0 when the file is valid, 1 when it is not, 2 when it cannot
/// be read. Diagnostics are one `path:line:col: RULE id` line each.
pub fn validate_file(path: &Path) -> (i32, Vec<String>) {
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) => return (2, vec![format!("{}: {e}", path.display())]),
    };
    let shown = path.display();
    match parse_mdl_bytes(&bytes) {
        Ok(_) => (0, Vec::new()),
        Err(MdlError::Parse(e)) => {
            (1, vec![format!("{shown}:{}:{}: {} {}", e.line, e.col, e.code.as_str(), e.message)])
        }
        Err(MdlError::Invalid(errs)) => (
            1,
            errs.iter()
                .map(|e| match e.span {
                    Some(s) => format!("{shown}:{}:{}: {} {}", s.line, s.col, e.rule, e.offending_id),
                    None => format!("{shown}: {} {}", e.rule, e.offending_id),
                })
                .collect(),
        ),
    }
}
