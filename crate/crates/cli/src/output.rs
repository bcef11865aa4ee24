use clap::ValueEnum;
use comodi_core::xml::Element;
use comodi_core::Diagnostic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Xml,
    Text,
}

pub(crate) fn diagnostics_xml(diags: &[Diagnostic]) -> Element {
    let mut root = Element::new("diagnostics");
    for d in diags {
        root.push(
            Element::new("diagnostic")
                .attr("severity", d.severity.to_string())
                .attr("code", d.code)
                .attr("path", d.path.as_str())
                .text(d.message.as_str()),
        );
    }
    root
}

pub(crate) fn diagnostics_text(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| format!("{d}\n")).collect()
}
