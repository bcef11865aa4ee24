//! XML debug dumps of a network and of parse trees.

use super::{AutomatonNetwork, Condition, ParseTree, StackOp, Token};
use crate::xml::Element;

pub fn network_to_xml(net: &AutomatonNetwork) -> Element {
    let mut root = Element::new("network")
        .attr("start", &net.start_symbol)
        .attr("markers", net.marker_count.to_string());
    for (name, a) in &net.automata {
        let mut el = Element::new("automaton")
            .attr("rule", name)
            .attr("states", a.state_count.to_string())
            .attr("initial", a.initial.to_string())
            .attr(
                "final",
                a.finals.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "),
            );
        if let Some(lex) = net.lexical.iter().find(|l| &l.kind == name) {
            el = el.attr("lexical", "true").attr("skip", lex.skip.to_string());
        }
        for t in &a.transitions {
            let mut tr = Element::new("transition")
                .attr("from", t.from.to_string())
                .attr("to", t.to.to_string());
            tr = match &t.condition {
                Condition::Terminal(s) => tr.attr("terminal", s),
                Condition::CharClass(m) => tr.attr("class", m.to_string()),
                Condition::Call(c) => tr.attr("call", c),
                Condition::Epsilon => tr,
            };
            tr = match t.stack_op {
                StackOp::None => tr,
                StackOp::Push(m) => tr.attr("push", m.0.to_string()),
                StackOp::PopExpect(m) => tr.attr("pop", m.0.to_string()),
            };
            el.push(tr);
        }
        root.push(el);
    }
    root
}

pub fn tree_to_xml(tree: &ParseTree, tokens: &[Token]) -> Element {
    match tree.token {
        Some(i) => {
            let t = &tokens[i];
            Element::new("token")
                .attr("kind", &t.kind)
                .attr("line", t.line.to_string())
                .attr("column", t.column.to_string())
                .text(&t.text)
        }
        None => {
            let mut el = Element::new("node")
                .attr("rule", &tree.label)
                .attr("from", tree.span.start.to_string())
                .attr("to", tree.span.end.to_string());
            for c in &tree.children {
                el.push(tree_to_xml(c, tokens));
            }
            el
        }
    }
}
