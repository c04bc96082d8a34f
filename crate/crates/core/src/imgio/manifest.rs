//! Dataset manifest: `ref_path,dist_path,distortion_type,level,mos`.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::distort::DistortionKind;
use crate::error::{Error, Result};

pub const MANIFEST_HEADER: [&str; 5] = ["ref_path", "dist_path", "distortion_type", "level", "mos"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub ref_path: PathBuf,
    pub dist_path: PathBuf,
    pub distortion_type: DistortionKind,
    pub level: u32,
    pub mos: Option<f64>,
}

impl ManifestEntry {
    pub fn ref_under(&self, root: &Path) -> PathBuf {
        root.join(&self.ref_path)
    }

    pub fn dist_under(&self, root: &Path) -> PathBuf {
        root.join(&self.dist_path)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn new(entries: Vec<ManifestEntry>) -> Result<Self> {
        let m = Self { entries };
        m.validate()?;
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries of one distortion type, in manifest order.
    pub fn of_kind(&self, kind: DistortionKind) -> DatasetManifest {
        DatasetManifest {
            entries: self
                .entries
                .iter()
                .filter(|e| e.distortion_type == kind)
                .cloned()
                .collect(),
        }
    }

    pub fn has_mos(&self) -> bool {
        self.entries.iter().any(|e| e.mos.is_some())
    }

    /// Row numbers in errors count the header as row 1.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for (i, e) in self.entries.iter().enumerate() {
            check_entry(e, i + 2, &mut seen)?;
        }
        Ok(())
    }

    pub fn from_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(reader);
        let mut records = rdr.records();
        let header = match records.next() {
            Some(r) => r.map_err(|e| manifest_err(1, e.to_string()))?,
            None => return Err(manifest_err(1, "missing header")),
        };
        let got: Vec<&str> = header.iter().map(str::trim).collect();
        if got != MANIFEST_HEADER {
            return Err(manifest_err(
                1,
                format!(
                    "missing header: expected `{}`, found `{}`",
                    MANIFEST_HEADER.join(","),
                    got.join(",")
                ),
            ));
        }
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (i, rec) in records.enumerate() {
            let row = i + 2;
            let rec = rec.map_err(|e| manifest_err(row, e.to_string()))?;
            if rec.len() == 1 && rec[0].trim().is_empty() {
                continue;
            }
            if rec.len() != 5 {
                return Err(manifest_err(
                    row,
                    format!("expected 5 fields, found {}", rec.len()),
                ));
            }
            let distortion_type = rec[2]
                .trim()
                .parse::<DistortionKind>()
                .map_err(|e| manifest_err(row, e.to_string()))?;
            let level = rec[3]
                .trim()
                .parse::<u32>()
                .map_err(|e| manifest_err(row, format!("bad level `{}`: {e}", &rec[3])))?;
            let mos = match rec[4].trim() {
                "" => None,
                s => Some(
                    s.parse::<f64>()
                        .map_err(|e| manifest_err(row, format!("bad mos `{s}`: {e}")))?,
                ),
            };
            let entry = ManifestEntry {
                ref_path: PathBuf::from(&rec[0]),
                dist_path: PathBuf::from(&rec[1]),
                distortion_type,
                level,
                mos,
            };
            check_entry(&entry, row, &mut seen)?;
            entries.push(entry);
        }
        Ok(Self { entries })
    }

    pub fn to_writer(&self, writer: impl Write) -> Result<()> {
        self.validate()?;
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::io("<manifest>", std::io::Error::other(e));
        w.write_record(MANIFEST_HEADER).map_err(io)?;
        for e in &self.entries {
            let mos = e.mos.map(|m| m.to_string()).unwrap_or_default();
            w.write_record([
                e.ref_path.to_string_lossy().as_ref(),
                e.dist_path.to_string_lossy().as_ref(),
                e.distortion_type.as_str(),
                &e.level.to_string(),
                &mos,
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::io("<manifest>", e))?;
        Ok(())
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.to_writer(&mut buf)?;
        Ok(buf)
    }
}

fn manifest_err(row: usize, reason: impl Into<String>) -> Error {
    Error::Manifest {
        row,
        reason: reason.into(),
    }
}

fn check_entry(e: &ManifestEntry, row: usize, seen: &mut HashSet<PathBuf>) -> Result<()> {
    if e.ref_path.as_os_str().is_empty() {
        return Err(manifest_err(row, "dangling dist_path: empty ref_path"));
    }
    if e.dist_path.as_os_str().is_empty() {
        return Err(manifest_err(row, "empty dist_path"));
    }
    if e.level < 1 {
        return Err(manifest_err(row, "level must be >= 1"));
    }
    if let Some(m) = e.mos {
        if !m.is_finite() {
            return Err(manifest_err(row, "mos must be finite"));
        }
    }
    if !seen.insert(e.dist_path.clone()) {
        return Err(manifest_err(
            row,
            format!("dist_path {} already listed", e.dist_path.display()),
        ));
    }
    Ok(())
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    DatasetManifest::from_reader(std::io::BufReader::new(file))
}

pub fn write_manifest(manifest: &DatasetManifest, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = manifest.to_csv_bytes()?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(s: &str) -> Result<DatasetManifest> {
        DatasetManifest::from_reader(s.as_bytes())
    }

    #[test]
    fn empty_manifest_is_header_only() {
        let bytes = DatasetManifest::default().to_csv_bytes().unwrap();
        assert_eq!(
            String::from_utf8(bytes).unwrap(),
            "ref_path,dist_path,distortion_type,level,mos\n"
        );
    }

    #[test]
    fn empty_mos_is_absent() {
        let m = parse(
            "ref_path,dist_path,distortion_type,level,mos\nref/a.png,dist/a_n3.png,gaussian_noise,3,\n",
        )
        .unwrap();
        assert_eq!(m.entries.len(), 1);
        let e = &m.entries[0];
        assert_eq!(e.mos, None);
        assert_eq!(e.level, 3);
        assert_eq!(e.distortion_type, DistortionKind::GaussianNoise);
        assert_eq!(e.ref_path, PathBuf::from("ref/a.png"));
    }

    #[test]
    fn bad_enum_names_row() {
        let err = parse(
            "ref_path,dist_path,distortion_type,level,mos\n\
             r.png,d1.png,gaussian_blur,1,\n\
             r.png,d2.png,speckle,2,\n",
        )
        .unwrap_err();
        match err {
            Error::Manifest { row, reason } => {
                assert_eq!(row, 3);
                assert!(reason.contains("speckle"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_header_rejected() {
        let err = parse("r.png,d.png,gaussian_blur,1,\n").unwrap_err();
        assert!(matches!(err, Error::Manifest { row: 1, .. }));
        assert!(matches!(parse(""), Err(Error::Manifest { row: 1, .. })));
    }

    #[test]
    fn dangling_and_duplicate_paths_rejected() {
        let h = "ref_path,dist_path,distortion_type,level,mos\n";
        assert!(matches!(
            parse(&format!("{h},d.png,gaussian_blur,1,\n")),
            Err(Error::Manifest { row: 2, .. })
        ));
        assert!(matches!(
            parse(&format!(
                "{h}a.png,d.png,gaussian_blur,1,\nb.png,d.png,gaussian_blur,2,\n"
            )),
            Err(Error::Manifest { row: 3, .. })
        ));
        assert!(matches!(
            parse(&format!("{h}a.png,d.png,gaussian_blur,0,\n")),
            Err(Error::Manifest { row: 2, .. })
        ));
    }

    fn arb_entry() -> impl Strategy<Value = ManifestEntry> {
        (
            "[a-z0-9_/ ,]{1,16}",
            0usize..5,
            1u32..=5,
            proptest::option::of(-100.0f64..100.0),
        )
            .prop_map(|(name, k, level, mos)| ManifestEntry {
                ref_path: PathBuf::from(format!("ref/{name}.png")),
                dist_path: PathBuf::from(format!("dist/{name}_{k}_{level}.png")),
                distortion_type: DistortionKind::ALL[k],
                level,
                mos,
            })
    }

    proptest! {
        #[test]
        fn round_trip_identity(entries in proptest::collection::vec(arb_entry(), 0..20)) {
            let mut seen = HashSet::new();
            let entries: Vec<_> = entries.into_iter().filter(|e| seen.insert(e.dist_path.clone())).collect();
            let m = DatasetManifest::new(entries).unwrap();
            let back = DatasetManifest::from_reader(&m.to_csv_bytes().unwrap()[..]).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
