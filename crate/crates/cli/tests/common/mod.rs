#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dii_core::{save_mask, BinaryMask};

pub fn dii() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dii"))
}

/// Runs the binary and returns its output, failing loudly if it could not start.
pub fn run(args: &[&str], cwd: &Path) -> Output {
    dii().args(args).current_dir(cwd).output().expect("spawn dii")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn write_mask(dir: &Path, name: &str, w: usize, h: usize, f: impl Fn(usize, usize) -> bool) -> PathBuf {
    let path = dir.join(name);
    save_mask(&BinaryMask::from_fn(w, h, f).unwrap(), &path).unwrap();
    path
}

/// The two-cell fixture: 8x4 image, 4-pixel cells, 8 feature pixels in the
/// left cell and 4 in the right, 3 of the left ones changed.
pub fn hand_fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let before = write_mask(dir, "before.pgm", 8, 4, |x, y| if x < 4 { y < 2 } else { y == 0 });
    let change = write_mask(dir, "change.pgm", 8, 4, |x, y| y == 0 && x < 3);
    (change, before)
}

pub fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub setting: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub iou: f64,
    pub counts: [u64; 4],
}

pub fn read_metrics(path: &Path) -> Vec<MetricsRow> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("setting,precision,recall,f1,iou,tp,fp,fn,tn"));
    lines
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            assert_eq!(f.len(), 9, "{line}");
            let num = |i: usize| f[i].parse::<f64>().unwrap();
            let int = |i: usize| f[i].parse::<u64>().unwrap();
            MetricsRow {
                setting: f[0].to_string(),
                precision: num(1),
                recall: num(2),
                f1: num(3),
                iou: num(4),
                counts: [int(5), int(6), int(7), int(8)],
            }
        })
        .collect()
}

pub fn metrics_for<'a>(rows: &'a [MetricsRow], setting: &str) -> &'a MetricsRow {
    rows.iter().find(|r| r.setting == setting).unwrap_or_else(|| panic!("no {setting} row"))
}

pub fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

pub fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}
