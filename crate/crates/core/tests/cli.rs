use std::process::{Command, Output};

fn fairdiv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fairdiv"))
        .args(args)
        .env("FAIRDIV_MAX_STATES", "1000000")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn solve_is_deterministic_and_checkable() {
    let args = ["-q", "solve", "--label", "fig3:d=3", "-n", "4", "--goal", "ef1-ts"];
    let a = fairdiv(&args);
    let b = fairdiv(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);

    let dir = std::env::temp_dir().join(format!("fairdiv-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("alloc.json");
    std::fs::write(&path, &a.stdout).unwrap();
    let p = path.to_str().unwrap();
    let c = fairdiv(&[
        "-q",
        "check",
        "--label",
        "fig3:d=3",
        "--alloc",
        p,
        "--pred",
        "ef1,ts,wts,so,po",
    ]);
    assert_eq!(code(&c), 0, "{}", String::from_utf8_lossy(&c.stdout));
    let ef = fairdiv(&["-q", "check", "--label", "fig3:d=3", "--alloc", p, "--pred", "ef"]);
    assert_eq!(code(&ef), 1);

    std::fs::write(&path, "not json").unwrap();
    assert_eq!(code(&fairdiv(&["-q", "check", "--label", "fig3:d=3", "--alloc", p])), 2);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn exit_codes() {
    assert_eq!(
        code(&fairdiv(&[
            "-q",
            "solve",
            "--label",
            "fig1",
            "--goal",
            "ef1-so-forest",
            "-n",
            "3"
        ])),
        0
    );
    assert_eq!(
        code(&fairdiv(&[
            "-q", "solve", "--label", "fig3:d=3", "-n", "3", "--goal", "ef1-ts"
        ])),
        2
    );
    assert_eq!(code(&fairdiv(&["-q", "solve", "--goal", "ef1-ts"])), 2);
    assert_eq!(
        code(&fairdiv(&[
            "-q", "oracle", "--label", "fig3:d=3", "-n", "3", "--pred", "ef1,ts"
        ])),
        1
    );
    assert_eq!(code(&fairdiv(&["-q", "repro", "--only", "zzz"])), 2);
}

#[test]
fn oracle_output_is_byte_identical() {
    let args = [
        "-q",
        "oracle",
        "--label",
        "appendixB:n=3",
        "-n",
        "3",
        "--pred",
        "ef1,so",
        "--threads",
        "4",
    ];
    let a = fairdiv(&args);
    let b = fairdiv(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("\"note\""));
}

#[test]
fn gen_is_deterministic() {
    let g = fairdiv(&["gen", "--label", "random:m=10,p=0.4", "--seed", "7"]);
    assert_eq!(code(&g), 0);
    let again = fairdiv(&["gen", "--label", "random:m=10,p=0.4", "--seed", "7"]);
    assert_eq!(g.stdout, again.stdout);
}
