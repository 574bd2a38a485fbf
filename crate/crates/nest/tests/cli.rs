use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nest::{fixture, serialize_instance, InstanceSpec};
use tempfile::TempDir;

fn nest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nest"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_instance(dir: &Path, spec: &InstanceSpec) -> PathBuf {
    let path = dir.join(format!("{}.txt", spec.label));
    fs::write(&path, serialize_instance(spec)).unwrap();
    path
}

fn value(out: &str, key: &str) -> String {
    out.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(' ')))
        .unwrap_or_else(|| panic!("no {key} in {out}"))
        .to_string()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn plus_needs_no_steps() {
    let dir = TempDir::new().unwrap();
    let inst = write_instance(dir.path(), &fixture("plus").unwrap());
    let o = nest(&["run", p(&inst)]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(value(&out, "steps"), "0");
    assert_eq!(value(&out, "nest_ok"), "true");
}

#[test]
fn line_of_four_ends_with_span_two() {
    let dir = TempDir::new().unwrap();
    let inst = write_instance(dir.path(), &fixture("line-4").unwrap());
    let trace = dir.path().join("t");
    let o = nest(&["run", p(&inst), "--trace", p(&trace), "--json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(json["nest_ok"], true);
    assert_eq!(json["iterations"], 2);
    let spec = fixture("line-4").unwrap();
    let events = nest::trace_file::read_trace(&trace).unwrap();
    let frames = nest::render::render(&spec, &events, u64::MAX, nest::render::Format::Ascii);
    let last = &frames.last().unwrap().body;
    let cells: nest_core::Field = last
        .lines()
        .rev()
        .enumerate()
        .flat_map(|(y, row)| {
            row.chars()
                .enumerate()
                .filter(|(_, ch)| *ch != '.' && *ch != '@')
                .map(move |(x, _)| nest_core::Cell::new(x as i64, y as i64))
        })
        .collect();
    assert_eq!(cells.len(), 4);
    assert_eq!(cells.span(), 2);
}

#[test]
fn json_and_text_agree() {
    let dir = TempDir::new().unwrap();
    let inst = write_instance(dir.path(), &fixture("comb").unwrap());
    let text = stdout(&nest(&["run", p(&inst)]));
    let json: serde_json::Value =
        serde_json::from_slice(&nest(&["run", p(&inst), "--json"]).stdout).unwrap();
    for key in [
        "z",
        "s",
        "steps",
        "sensing_steps",
        "iterations",
        "nest_ok",
        "invariant_violations",
    ] {
        assert_eq!(value(&text, key), json[key].to_string(), "{key}");
    }
    assert_eq!(
        value(&text, "trace_hash"),
        json["trace_hash"].as_str().unwrap()
    );
}

#[test]
fn verify_accepts_own_trace_and_flags_tampering() {
    let dir = TempDir::new().unwrap();
    let inst = write_instance(dir.path(), &fixture("spiral").unwrap());
    let trace = dir.path().join("spiral.trace");
    assert!(nest(&["run", p(&inst), "--trace", p(&trace)])
        .status
        .success());
    let o = nest(&["verify", p(&inst), p(&trace)]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("clean"));

    // A light robot walking over an empty cell now claims to drop a brick.
    let text = fs::read_to_string(&trace).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let k = lines
        .iter()
        .position(|l| l.contains(" move ") && l.ends_with(" e l"))
        .unwrap();
    let mut tampered: Vec<String> = lines.iter().map(|s| s.to_string()).collect();
    tampered[k] = tampered[k].replace(" e l", " f l");
    let bad = dir.path().join("bad.trace");
    fs::write(&bad, tampered.join("\n")).unwrap();
    let o = nest(&["verify", p(&inst), p(&bad), "--json"]);
    assert_eq!(o.status.code(), Some(1));
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(json["violations"][0]["index"], k as u64);
    assert!(json["violations"][0]["message"]
        .as_str()
        .unwrap()
        .starts_with("illegal output"));

    let cut = dir.path().join("cut.trace");
    fs::write(&cut, lines[..lines.len() / 2].join("\n")).unwrap();
    let o = nest(&["verify", p(&inst), p(&cut)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("first violation at event"));
}

#[test]
fn render_every_large_gives_two_frames() {
    let dir = TempDir::new().unwrap();
    let inst = write_instance(dir.path(), &fixture("L-shape").unwrap());
    let trace = dir.path().join("l.trace");
    assert!(nest(&["run", p(&inst), "--trace", p(&trace)])
        .status
        .success());
    let frames = dir.path().join("frames");
    let o = nest(&[
        "render",
        p(&inst),
        p(&trace),
        "-o",
        p(&frames),
        "--every",
        "1000000",
        "--format",
        "svg",
    ]);
    assert!(o.status.success());
    let n = fs::read_dir(&frames).unwrap().count();
    assert_eq!(n, 2);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "S.#\n").unwrap();
    assert_eq!(nest(&["run", p(&bad)]).status.code(), Some(2));
    assert_eq!(
        nest(&["run", p(&dir.path().join("missing"))]).status.code(),
        Some(2)
    );
    let empty = dir.path().join("empty.manifest");
    fs::write(&empty, "# nothing\n").unwrap();
    let o = nest(&["bench", p(&empty)]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn gen_writes_parsable_instances() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("r.txt");
    assert!(
        nest(&["gen", "random", "--z", "40", "--seed", "9", "-o", p(&out)])
            .status
            .success()
    );
    let spec = nest::parse_instance(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(spec, nest::gen_random_connected(40, 9).unwrap());
    let o = nest(&["gen", "rect", "--z", "10", "--s", "10"]);
    assert_eq!(o.status.code(), Some(2));
    let o = nest(&["gen", "fixture", "plus"]);
    assert!(stdout(&o).contains(".#.\n#S#\n.#.\n"));
}

#[test]
fn bench_reports_ratio_per_group() {
    let dir = TempDir::new().unwrap();
    let m = dir.path().join("m");
    fs::write(
        &m,
        "random z=30 seeds=0..2 group=small\nfixture name=comb\n",
    )
    .unwrap();
    let o = nest(&["bench", p(&m)]);
    assert!(o.status.success(), "{}", stdout(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| !l.starts_with('#')).count(), 4);
    assert!(out.contains("# small: n=2"));
    assert!(out.contains("# fixture: n=1"));
}
