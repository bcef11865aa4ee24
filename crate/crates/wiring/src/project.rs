//! Project files: which component instances make up an application and
//! how their ports are connected.
//!
//! ```xml
//! <project>
//!   <instance id="src" pkg="source" version="1.0.0"/>
//!   <instance id="mid" pkg="scaler" version="1.0.0"/>
//!   <connect from="mid.up" to="src.f"/>
//!   <param instance="mid" port="g" name="k" value="3.0"/>
//!   <entry instance="mid" port="g"/>
//! </project>
//! ```

use std::collections::BTreeSet;

use comodi_core::cdl::Version;
use comodi_core::xml::{self, Element, XmlError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub id: String,
    pub package: String,
    pub version: Version,
}

/// An instance and one of its ports.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PortRef {
    pub instance: String,
    pub port: String,
}

impl PortRef {
    pub fn new(instance: &str, port: &str) -> Self {
        PortRef {
            instance: instance.into(),
            port: port.into(),
        }
    }

    fn parse(s: &str) -> Option<PortRef> {
        let (i, p) = s.split_once('.')?;
        (!i.is_empty() && !p.is_empty() && !p.contains('.')).then(|| PortRef::new(i, p))
    }
}

impl std::fmt::Display for PortRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}.{}", self.instance, self.port)
    }
}

/// A uses port wired to a provides port.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connection {
    pub from: PortRef,
    pub to: PortRef,
}

/// Replaces the default of one parameter of a provides port.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamOverride {
    pub port: PortRef,
    pub name: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectDescription {
    pub instances: Vec<Instance>,
    pub connections: Vec<Connection>,
    pub overrides: Vec<ParamOverride>,
    pub entry: PortRef,
}

impl ProjectDescription {
    pub fn instance(&self, id: &str) -> Option<&Instance> {
        self.instances.iter().find(|i| i.id == id)
    }

    /// Connections leaving `instance`.
    pub fn connections_from<'a>(&'a self, instance: &'a str) -> impl Iterator<Item = &'a Connection> + 'a {
        self.connections.iter().filter(move |c| c.from.instance == instance)
    }

    pub fn to_xml(&self) -> Element {
        let mut root = Element::new("project");
        for i in &self.instances {
            root.push(
                Element::new("instance")
                    .attr("id", i.id.as_str())
                    .attr("pkg", i.package.as_str())
                    .attr("version", i.version.to_string()),
            );
        }
        for c in &self.connections {
            root.push(Element::new("connect").attr("from", c.from.to_string()).attr("to", c.to.to_string()));
        }
        for o in &self.overrides {
            root.push(
                Element::new("param")
                    .attr("instance", o.port.instance.as_str())
                    .attr("port", o.port.port.as_str())
                    .attr("name", o.name.as_str())
                    .attr("value", o.value.as_str()),
            );
        }
        root.push(
            Element::new("entry")
                .attr("instance", self.entry.instance.as_str())
                .attr("port", self.entry.port.as_str()),
        );
        root
    }
}

pub fn project_to_string(p: &ProjectDescription) -> String {
    p.to_xml().to_document()
}

pub fn load_project(text: &str) -> Result<ProjectDescription, XmlError> {
    let root = xml::parse(text)?;
    if root.name != "project" {
        return Err(XmlError::schema("/", "expected project root"));
    }
    root.only_attrs(&[], "/project")?;
    let mut instances: Vec<Instance> = Vec::new();
    let mut connections = Vec::new();
    let mut overrides = Vec::new();
    let mut entry = None;
    let mut seen = BTreeSet::new();
    for (i, el) in root.elements().enumerate() {
        let here = format!("/project/{}[{i}]", el.name);
        match el.name.as_str() {
            "instance" => {
                el.only_attrs(&["id", "pkg", "version"], &here)?;
                let id = el.require("id", &here)?;
                if !seen.insert(id.to_string()) {
                    return Err(XmlError::schema(format!("{here}@id"), format!("duplicate instance id {id}")));
                }
                let version = el.require("version", &here)?;
                instances.push(Instance {
                    id: id.into(),
                    package: el.require("pkg", &here)?.into(),
                    version: version.parse().map_err(|e: String| XmlError::schema(format!("{here}@version"), e))?,
                });
            }
            "connect" => {
                el.only_attrs(&["from", "to"], &here)?;
                let end = |key: &str| -> Result<PortRef, XmlError> {
                    let v = el.require(key, &here)?;
                    PortRef::parse(v).ok_or_else(|| XmlError::schema(format!("{here}@{key}"), format!("expected instance.port, got {v}")))
                };
                connections.push((here.clone(), Connection { from: end("from")?, to: end("to")? }));
            }
            "param" => {
                el.only_attrs(&["instance", "port", "name", "value"], &here)?;
                overrides.push((
                    here.clone(),
                    ParamOverride {
                        port: PortRef::new(el.require("instance", &here)?, el.require("port", &here)?),
                        name: el.require("name", &here)?.into(),
                        value: el.require("value", &here)?.into(),
                    },
                ));
            }
            "entry" => {
                el.only_attrs(&["instance", "port"], &here)?;
                if entry.is_some() {
                    return Err(XmlError::schema(here, "more than one entry"));
                }
                entry = Some((here.clone(), PortRef::new(el.require("instance", &here)?, el.require("port", &here)?)));
            }
            other => return Err(XmlError::schema(here, format!("unknown element {other}"))),
        }
    }
    let declared = |path: String, r: &PortRef| {
        if seen.contains(&r.instance) {
            Ok(())
        } else {
            Err(XmlError::schema(path, format!("undeclared instance {}", r.instance)))
        }
    };
    for (path, c) in &connections {
        declared(format!("{path}@from"), &c.from)?;
        declared(format!("{path}@to"), &c.to)?;
    }
    for (path, o) in &overrides {
        declared(format!("{path}@instance"), &o.port)?;
    }
    let (path, entry) = entry.ok_or_else(|| XmlError::schema("/project", "missing entry"))?;
    declared(format!("{path}@instance"), &entry)?;
    Ok(ProjectDescription {
        instances,
        connections: connections.into_iter().map(|(_, c)| c).collect(),
        overrides: overrides.into_iter().map(|(_, o)| o).collect(),
        entry,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PIPE: &str = r#"<project>
  <instance id="src" pkg="source" version="1.0.0"/>
  <instance id="mid" pkg="scaler" version="1.0.0"/>
  <connect from="mid.up" to="src.f"/>
  <entry instance="mid" port="g"/>
</project>"#;

    #[test]
    fn two_instance_pipeline() {
        let p = load_project(PIPE).unwrap();
        assert_eq!(p.instances.len(), 2);
        assert_eq!(p.connections.len(), 1);
        assert_eq!(p.connections[0].to, PortRef::new("src", "f"));
        assert_eq!(load_project(&project_to_string(&p)).unwrap(), p);
    }

    #[test]
    fn duplicate_instance() {
        let text = PIPE.replace("id=\"mid\"", "id=\"src\"");
        let err = load_project(&text).unwrap_err();
        assert_eq!(err.path(), Some("/project/instance[1]@id"));
    }

    #[test]
    fn undeclared_endpoint() {
        let text = PIPE.replace("to=\"src.f\"", "to=\"nowhere.f\"");
        let err = load_project(&text).unwrap_err();
        assert_eq!(err.path(), Some("/project/connect[2]@to"));
    }

    #[test]
    fn entry_required_and_unique() {
        let text = PIPE.replace("<entry instance=\"mid\" port=\"g\"/>", "");
        assert!(load_project(&text).is_err());
        let text = PIPE.replace("</project>", "<entry instance=\"src\" port=\"f\"/></project>");
        assert!(load_project(&text).is_err());
        let text = PIPE.replace("from=\"mid.up\"", "from=\"midup\"");
        assert!(load_project(&text).is_err());
    }
}
