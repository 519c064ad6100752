#![no_main]

use camm_core::report::{render_report, Report, ReportFormat};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(report) = Report::from_json(data) {
        let _ = render_report(&report, ReportFormat::Markdown);
        let _ = render_report(&report, ReportFormat::Html);
        let json = render_report(&report, ReportFormat::Json);
        assert_eq!(Report::from_json(&json).expect("report round-trips"), report);
    }
});
