use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const TABLE1: &str = "alphabet A B C D E\nABADD\nABAEE\nABBDD\nABBEE\nABCDD\nABCEE\n";
const PAIR: &str = "alphabet A B C D E\nABABCDDEE\nABCBAEEDD\n";

fn divstr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_divstr"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn file(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn exact_yes_and_no() {
    let dir = TempDir::new().unwrap();
    let t1 = file(&dir, "t1.txt", TABLE1);
    let yes = divstr(&[
        "exact",
        "--mode",
        "maxmin",
        "--k",
        "2",
        "--delta",
        "3",
        "--strings",
        s(&t1),
        "--witness",
        "--no-timing",
    ]);
    assert_eq!(yes.status.code(), Some(0));
    let out = stdout(&yes);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "DECISION YES");
    assert_eq!(lines[1], "ACHIEVED 3");
    assert!(lines[2].starts_with("STATS ") && lines[2].contains("states="));
    assert_eq!(lines.len(), 5);
    let no = divstr(&[
        "exact",
        "--mode",
        "maxsum",
        "--k",
        "3",
        "--delta",
        "8",
        "--strings",
        s(&t1),
    ]);
    assert_eq!(no.status.code(), Some(1));
    assert!(stdout(&no).starts_with("DECISION NO\n"));
}

#[test]
fn optimize_reports_the_optimum() {
    let dir = TempDir::new().unwrap();
    let t1 = file(&dir, "t1.txt", TABLE1);
    for (mode, k, want) in [
        ("maxmin", "2", "3"),
        ("maxmin", "3", "1"),
        ("maxsum", "3", "7"),
        ("maxsum", "6", "30"),
    ] {
        let o = divstr(&[
            "exact",
            "--mode",
            mode,
            "--k",
            k,
            "--optimize",
            "--strings",
            s(&t1),
            "--format",
            "json",
            "--no-timing",
        ]);
        assert_eq!(o.status.code(), Some(0));
        let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
        assert_eq!(v["value"], want, "{mode} K={k}");
        assert_eq!(v["decision"], true);
        assert!(v["stats"]["states"].is_number());
        assert!(v.get("witness").is_some());
    }
}

#[test]
fn lcs_dag_then_enumerate() {
    let dir = TempDir::new().unwrap();
    let pair = file(&dir, "pair.txt", PAIR);
    let g = dir.path().join("g.dag");
    let o = divstr(&[
        "lcs-dag",
        "--strings",
        s(&pair),
        "--out",
        s(&g),
        "--no-timing",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("R 5\n"));
    let e = divstr(&["enumerate", "--dag", s(&g), "--no-timing"]);
    assert_eq!(e.status.code(), Some(0));
    let strings: Vec<String> = stdout(&e)
        .lines()
        .filter(|l| !l.starts_with("STATS"))
        .map(String::from)
        .collect();
    assert_eq!(
        strings,
        ["ABADD", "ABAEE", "ABBDD", "ABBEE", "ABCDD", "ABCEE"]
    );
    let v = divstr(&["validate", "--dag", s(&g)]);
    assert_eq!(v.status.code(), Some(0));
}

#[test]
fn validate_rejects_inconsistent_depth() {
    let dir = TempDir::new().unwrap();
    let bad = file(
        &dir,
        "bad.dag",
        "dag 2\nalphabet a\nvertex s\nvertex u\nvertex t\nedge s a u\nedge u a t\nedge s a t\n",
    );
    let o = divstr(&["validate", "--dag", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("inconsistent depth"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(divstr(&["bogus"]).status.code(), Some(2));
    assert_eq!(
        divstr(&["exact", "--mode", "maxmin", "--k", "2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        divstr(&[
            "exact",
            "--mode",
            "nope",
            "--k",
            "2",
            "--delta",
            "1",
            "--strings",
            "x"
        ])
        .status
        .code(),
        Some(2)
    );
    let missing = divstr(&[
        "exact",
        "--mode",
        "maxmin",
        "--k",
        "2",
        "--delta",
        "1",
        "--strings",
        "/nonexistent/x",
    ]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn budget_exit_3() {
    let dir = TempDir::new().unwrap();
    let t1 = file(&dir, "t1.txt", TABLE1);
    let o = divstr(&[
        "exact",
        "--mode",
        "maxmin",
        "--k",
        "3",
        "--delta",
        "1",
        "--strings",
        s(&t1),
        "--max-states",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let e = divstr(&["enumerate", "--strings", s(&t1), "--limit", "3"]);
    assert_eq!(e.status.code(), Some(3));
}

#[test]
fn ptas_prints_value_first() {
    let dir = TempDir::new().unwrap();
    let t1 = file(&dir, "t1.txt", TABLE1);
    let o = divstr(&[
        "ptas",
        "--k",
        "3",
        "--eps",
        "0.1",
        "--strings",
        s(&t1),
        "--no-timing",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("VALUE 7\n"), "{out}");
    assert!(out.contains("branch=exact"));
    assert_eq!(out.lines().count(), 2 + 3);
    let infeasible = divstr(&["ptas", "--k", "7", "--eps", "0.5", "--strings", s(&t1)]);
    assert_eq!(infeasible.status.code(), Some(2));
}

#[test]
fn fpt_is_sound_and_deterministic() {
    let dir = TempDir::new().unwrap();
    let t1 = file(&dir, "t1.txt", TABLE1);
    let args = [
        "fpt",
        "--mode",
        "maxmin",
        "--k",
        "2",
        "--delta",
        "3",
        "--seed",
        "5",
        "--strings",
        s(&t1),
        "--witness",
        "--no-timing",
    ];
    let a = divstr(&args);
    let b = divstr(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("verification_failures=0"));
    let mut threaded = args.to_vec();
    threaded.extend(["--threads", "3"]);
    assert_eq!(divstr(&threaded).stdout, a.stdout);
    let no = divstr(&[
        "fpt",
        "--mode",
        "maxmin",
        "--k",
        "3",
        "--delta",
        "2",
        "--reps",
        "50",
        "--strings",
        s(&t1),
    ]);
    assert_eq!(no.status.code(), Some(1));
}

#[test]
fn deterministic_commands_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let t1 = file(&dir, "t1.txt", TABLE1);
    let args = [
        "exact",
        "--mode",
        "maxsum",
        "--k",
        "3",
        "--delta",
        "7",
        "--strings",
        s(&t1),
        "--witness",
        "--no-timing",
    ];
    assert_eq!(divstr(&args).stdout, divstr(&args).stdout);
    let with_time = divstr(&[
        "exact",
        "--mode",
        "maxsum",
        "--k",
        "3",
        "--delta",
        "7",
        "--strings",
        s(&t1),
    ]);
    assert!(stdout(&with_time).contains("TIME "));
}

#[test]
fn reductions_round_trip() {
    let dir = TempDir::new().unwrap();
    let tdm = file(&dir, "m.3dm", "n 2\n1 1 1\n2 2 2\n1 2 2\n");
    let out = dir.path().join("m.txt");
    let o = divstr(&[
        "reduce",
        "3dm",
        "--in",
        s(&tdm),
        "--out",
        s(&out),
        "--no-timing",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(
        text.contains("K 2\n") && text.contains("DELTA_MIN 3\n") && text.contains("DELTA_SUM 3\n"),
        "{text}"
    );
    let solved = divstr(&[
        "exact",
        "--mode",
        "maxmin",
        "--k",
        "2",
        "--delta",
        "3",
        "--strings",
        s(&out),
    ]);
    assert_eq!(solved.status.code(), Some(0));
    assert_eq!(
        divstr(&["oracle", "3dm", "--in", s(&tdm)]).status.code(),
        Some(0)
    );

    let graph = file(&dir, "g.txt", "n 3\n1 2\n2 3\n");
    let cl = dir.path().join("c.txt");
    let o = divstr(&[
        "reduce",
        "clique",
        "--in",
        s(&graph),
        "--out",
        s(&cl),
        "--k",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let solved = divstr(&[
        "exact",
        "--mode",
        "maxmin",
        "--k",
        "3",
        "--delta",
        "3",
        "--strings",
        s(&cl),
    ]);
    assert_eq!(solved.status.code(), Some(1));
    assert_eq!(
        divstr(&["oracle", "clique", "--in", s(&graph), "--k", "3"])
            .status
            .code(),
        Some(1)
    );

    let set = file(&dir, "l.txt", "alphabet 0 1\n01\n10\n11\n");
    let enc = dir.path().join("enc.txt");
    let o = divstr(&[
        "reduce",
        "lcs-encode",
        "--in",
        s(&set),
        "--out",
        s(&enc),
        "--k",
        "2",
        "--delta",
        "2",
        "--mode",
        "maxmin",
        "--stretch",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("DELTA_SHIFTED 8\n"));
    assert!(fs::read_to_string(&enc)
        .unwrap()
        .starts_with("# DELTA_SHIFTED 8\n"));
    let g = dir.path().join("enc.dag");
    assert_eq!(
        divstr(&["lcs-dag", "--strings", s(&enc), "--out", s(&g)])
            .status
            .code(),
        Some(0)
    );
    let decided = divstr(&[
        "exact",
        "--mode",
        "maxmin",
        "--k",
        "2",
        "--delta",
        "8",
        "--dag",
        s(&g),
    ]);
    assert_eq!(decided.status.code(), Some(0));
    let too_far = divstr(&[
        "exact",
        "--mode",
        "maxmin",
        "--k",
        "2",
        "--delta",
        "9",
        "--dag",
        s(&g),
    ]);
    assert_eq!(too_far.status.code(), Some(1));

    let o = divstr(&[
        "reduce",
        "lcs-encode",
        "--in",
        s(&set),
        "--out",
        s(&enc),
        "--k",
        "2",
        "--delta",
        "2",
        "--mode",
        "maxmin",
    ]);
    assert!(stdout(&o).contains("DELTA_SHIFTED 32\n"));
    assert!(stdout(&o).contains("stretch=5"));
}

#[test]
fn oracle_subcommands() {
    let dir = TempDir::new().unwrap();
    let t1 = file(&dir, "t1.txt", TABLE1);
    let pair = file(&dir, "pair.txt", PAIR);
    let o = divstr(&[
        "oracle",
        "diverse",
        "--mode",
        "maxmin",
        "--k",
        "2",
        "--strings",
        s(&t1),
        "--no-timing",
    ]);
    assert!(stdout(&o).contains("OPTIMUM 3\n"));
    let l = divstr(&["oracle", "lcs", "--strings", s(&pair), "--no-timing"]);
    assert_eq!(
        stdout(&l).lines().filter(|x| x.starts_with("AB")).count(),
        6
    );
    let refs = file(&dir, "refs.txt", "alphabet A B C D E\nABADD\nABBEE\n");
    let f = divstr(&[
        "oracle",
        "farthest",
        "--strings",
        s(&t1),
        "--refs",
        s(&refs),
        "--no-timing",
    ]);
    assert!(stdout(&f).starts_with("VALUE 4\n"));
}
