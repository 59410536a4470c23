//! Point-cloud file I/O: ascii PLY and whitespace-delimited xyzrgb text.
//!
//! PLY carries the georeference in a header comment
//! `comment geo_origin <x> <y> <z> <crs_tag>`; the text format uses a
//! sidecar file `<name>.origin` with the same four fields on one line.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::cloud::{ClassLabel, Point, PointCloud};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    PlyAscii,
    XyzRgbText,
}

impl Format {
    /// Picks a format from the file extension: `.ply` is PLY, anything
    /// else is treated as xyzrgb text.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("ply") => Format::PlyAscii,
            _ => Format::XyzRgbText,
        }
    }
}

pub fn load_point_cloud(path: &Path, format: Format) -> Result<PointCloud> {
    let text = fs::read_to_string(path)?;
    match format {
        Format::PlyAscii => parse_ply(&text),
        Format::XyzRgbText => {
            let mut cloud = parse_xyzrgb(&text)?;
            let sidecar = origin_sidecar(path);
            if sidecar.exists() {
                let line = fs::read_to_string(&sidecar)?;
                let fields: Vec<&str> = line.split_whitespace().collect();
                if fields.len() != 4 {
                    return Err(Error::Parse {
                        line: 1,
                        msg: format!("origin sidecar needs 4 fields, got {}", fields.len()),
                    });
                }
                for (i, f) in fields[..3].iter().enumerate() {
                    cloud.geo_origin[i] = parse_num(f, 1)?;
                }
                cloud.crs_tag = fields[3].to_string();
            }
            Ok(cloud)
        }
    }
}

pub fn save_point_cloud(cloud: &PointCloud, path: &Path, format: Format) -> Result<()> {
    cloud.require_non_empty()?;
    match format {
        Format::PlyAscii => fs::write(path, write_ply(cloud))?,
        Format::XyzRgbText => {
            fs::write(path, write_xyzrgb(cloud))?;
            if cloud.crs_tag != "local" || cloud.geo_origin != [0.0; 3] {
                let o = cloud.geo_origin;
                fs::write(
                    origin_sidecar(path),
                    format!("{} {} {} {}\n", o[0], o[1], o[2], cloud.crs_tag),
                )?;
            }
        }
    }
    Ok(())
}

fn origin_sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".origin");
    PathBuf::from(s)
}

fn parse_num(s: &str, line: usize) -> Result<f64> {
    s.parse::<f64>().map_err(|_| Error::Parse {
        line,
        msg: format!("bad number {s:?}"),
    })
}

fn parse_color(v: f64, line: usize) -> Result<u8> {
    if !(0.0..=255.0).contains(&v) || v.fract() != 0.0 {
        return Err(Error::Parse {
            line,
            msg: format!("color channel {v} out of [0, 255]"),
        });
    }
    Ok(v as u8)
}

fn parse_label(v: f64, line: usize) -> Result<ClassLabel> {
    if v.fract() != 0.0 || !(0.0..=255.0).contains(&v) {
        return Err(Error::Parse {
            line,
            msg: format!("bad label value {v}"),
        });
    }
    ClassLabel::from_code(v as u8).ok_or(Error::Parse {
        line,
        msg: format!("unknown label code {v}"),
    })
}

fn parse_ply(text: &str) -> Result<PointCloud> {
    let mut lines = text.lines().enumerate();
    let mut expect = |want: &str| -> Result<()> {
        match lines.next() {
            Some((n, l)) if l.trim() == want => {
                let _ = n;
                Ok(())
            }
            Some((n, l)) => Err(Error::Parse {
                line: n + 1,
                msg: format!("expected {want:?}, got {l:?}"),
            }),
            None => Err(Error::Parse {
                line: 0,
                msg: format!("expected {want:?}, got end of file"),
            }),
        }
    };
    expect("ply")?;
    expect("format ascii 1.0")?;

    let mut vertex_count: Option<usize> = None;
    let mut properties: Vec<String> = Vec::new();
    let mut geo_origin = [0.0; 3];
    let mut crs_tag = "local".to_string();
    let mut body_start = 0usize;
    for (n, raw) in &mut lines {
        let line = raw.trim();
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            ["end_header"] => {
                body_start = n + 1;
                break;
            }
            ["comment", "geo_origin", x, y, z, tag] => {
                geo_origin = [
                    parse_num(x, n + 1)?,
                    parse_num(y, n + 1)?,
                    parse_num(z, n + 1)?,
                ];
                crs_tag = tag.to_string();
            }
            ["comment", ..] | ["obj_info", ..] => {}
            ["element", "vertex", count] => {
                vertex_count = Some(count.parse().map_err(|_| Error::Parse {
                    line: n + 1,
                    msg: format!("bad vertex count {count:?}"),
                })?);
            }
            ["element", _, _] => {
                return Err(Error::Parse {
                    line: n + 1,
                    msg: "only the vertex element is supported".into(),
                })
            }
            ["property", _ty, name] => properties.push(name.to_string()),
            _ => {
                return Err(Error::Parse {
                    line: n + 1,
                    msg: format!("unrecognized header line {line:?}"),
                })
            }
        }
    }
    if body_start == 0 {
        return Err(Error::Parse {
            line: 0,
            msg: "missing end_header".into(),
        });
    }
    let count = vertex_count.ok_or_else(|| Error::MissingProperty("element vertex".into()))?;
    if count == 0 {
        return Err(Error::EmptyCloud);
    }

    let col = |name: &str| properties.iter().position(|p| p == name);
    let (ix, iy, iz) = match (col("x"), col("y"), col("z")) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(Error::MissingProperty("x/y/z".into())),
    };
    let (ir, ig, ib) = match (col("red"), col("green"), col("blue")) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(Error::MissingProperty("red/green/blue".into())),
    };
    let ilabel = col("label");

    let mut points = Vec::with_capacity(count);
    let mut labels = ilabel.map(|_| Vec::with_capacity(count));
    for (n, raw) in lines.take(count) {
        let vals: Vec<f64> = raw
            .split_whitespace()
            .map(|t| parse_num(t, n + 1))
            .collect::<Result<_>>()?;
        if vals.len() < properties.len() {
            return Err(Error::Parse {
                line: n + 1,
                msg: format!(
                    "vertex row has {} values, header declares {}",
                    vals.len(),
                    properties.len()
                ),
            });
        }
        points.push(Point::new(
            vals[ix],
            vals[iy],
            vals[iz],
            parse_color(vals[ir], n + 1)?,
            parse_color(vals[ig], n + 1)?,
            parse_color(vals[ib], n + 1)?,
        ));
        if let (Some(labels), Some(il)) = (labels.as_mut(), ilabel) {
            labels.push(parse_label(vals[il], n + 1)?);
        }
    }
    if points.len() < count {
        return Err(Error::Parse {
            line: 0,
            msg: format!("expected {count} vertices, found {}", points.len()),
        });
    }
    let cloud = PointCloud {
        points,
        labels,
        geo_origin,
        crs_tag,
    };
    cloud.validate()?;
    Ok(cloud)
}

fn write_ply(cloud: &PointCloud) -> String {
    let mut s = String::new();
    s.push_str("ply\nformat ascii 1.0\n");
    let o = cloud.geo_origin;
    let _ = writeln!(
        s,
        "comment geo_origin {} {} {} {}",
        o[0], o[1], o[2], cloud.crs_tag
    );
    let _ = writeln!(s, "element vertex {}", cloud.len());
    s.push_str(
        "property double x\nproperty double y\nproperty double z\n\
         property uchar red\nproperty uchar green\nproperty uchar blue\n",
    );
    if cloud.labels.is_some() {
        s.push_str("property uchar label\n");
    }
    s.push_str("end_header\n");
    for (i, p) in cloud.points.iter().enumerate() {
        let _ = write!(s, "{} {} {} {} {} {}", p.x, p.y, p.z, p.r, p.g, p.b);
        if let Some(labels) = &cloud.labels {
            let _ = write!(s, " {}", labels[i].code());
        }
        s.push('\n');
    }
    s
}

fn parse_xyzrgb(text: &str) -> Result<PointCloud> {
    let mut points = Vec::new();
    let mut labels: Option<Vec<ClassLabel>> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| parse_num(t, n + 1))
            .collect::<Result<_>>()?;
        match vals.len() {
            6 | 7 => {}
            k if k < 6 => return Err(Error::MissingProperty(format!("line {}: x y z r g b", n + 1))),
            _ => {
                return Err(Error::Parse {
                    line: n + 1,
                    msg: format!("expected 6 or 7 fields, got {}", vals.len()),
                })
            }
        }
        points.push(Point::new(
            vals[0],
            vals[1],
            vals[2],
            parse_color(vals[3], n + 1)?,
            parse_color(vals[4], n + 1)?,
            parse_color(vals[5], n + 1)?,
        ));
        if vals.len() == 7 {
            labels
                .get_or_insert_with(Vec::new)
                .push(parse_label(vals[6], n + 1)?);
        } else if labels.is_some() {
            return Err(Error::Parse {
                line: n + 1,
                msg: "mixed labeled and unlabeled rows".into(),
            });
        }
    }
    if points.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if let Some(l) = &labels {
        if l.len() != points.len() {
            return Err(Error::Parse {
                line: 0,
                msg: "mixed labeled and unlabeled rows".into(),
            });
        }
    }
    Ok(PointCloud {
        points,
        labels,
        geo_origin: [0.0; 3],
        crs_tag: "local".to_string(),
    })
}

fn write_xyzrgb(cloud: &PointCloud) -> String {
    let mut s = String::new();
    for (i, p) in cloud.points.iter().enumerate() {
        let _ = write!(s, "{} {} {} {} {} {}", p.x, p.y, p.z, p.r, p.g, p.b);
        if let Some(labels) = &cloud.labels {
            let _ = write!(s, " {}", labels[i].code());
        }
        s.push('\n');
    }
    s
}
