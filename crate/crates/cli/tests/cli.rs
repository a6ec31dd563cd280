use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use chatsim_core::chatscript::extract_script;
use chatsim_core::llm::replay_key;
use serde_json::{json, Value};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn chatsim(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_chatsim"))
        .args(args)
        .env("RUST_LOG", "warn")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn agent_position(dir: &Path) -> Value {
    let scene: Value =
        serde_json::from_str(&fs::read_to_string(dir.join("scene.json")).unwrap()).unwrap();
    scene["agent"]["position"].clone()
}

fn write_config(dir: &Path, run: Value) -> PathBuf {
    let cfg = json!({
        "run": run,
        "provider": {"kind": "replay", "fixture": configs().join("fixtures/experiments.json")},
        "output_dir": dir.join("out"),
    });
    let path = dir.join("config.json");
    fs::write(&path, cfg.to_string()).unwrap();
    path
}

#[test]
fn experiment_one_runs_to_the_target() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = configs().join("exp1.json");
    let o = chatsim(
        &[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--output",
            out.to_str().unwrap(),
        ],
        "",
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(agent_position(&out), json!([15.0, 25.0, 0.0]));
    for f in [
        "trajectory.jsonl",
        "captures.jsonl",
        "transcript.jsonl",
        "report.json",
        "capture_0.ppm",
    ] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let report: Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["accepted"], 1);
    assert_eq!(report["frames_executed"], 1000);
}

#[test]
fn negative_frame_limit_names_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), json!({"frame_limit": -5}));
    let o = chatsim(&["run", "--config", cfg.to_str().unwrap()], "");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("run.frame_limit"));
}

#[test]
fn missing_config_is_an_io_error() {
    let o = chatsim(&["run", "--config", "/nonexistent/chatsim.json"], "");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn provider_failure_without_input_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        json!({"frame_limit": 16, "predefined_instructions": ["an instruction nobody recorded"]}),
    );
    let o = chatsim(&["run", "--config", cfg.to_str().unwrap()], "");
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn with_input_reads_instructions_from_stdin() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), json!({"frame_limit": 200}));
    let o = chatsim(
        &[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--mode",
            "with_input",
        ],
        "move the BlueROV from 0,0,0 to 15,25,0\n",
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        agent_position(&tmp.path().join("out")),
        json!([15.0, 25.0, 0.0])
    );
}

#[test]
fn provider_flag_accepts_a_fixture_map() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "turn around";
    let fixture = json!({ replay_key(text): {"text": text, "reply": "```\nset_yaw(180)\n```"} });
    let fixture_path = tmp.path().join("turn.json");
    fs::write(&fixture_path, fixture.to_string()).unwrap();
    let cfg = write_config(
        tmp.path(),
        json!({"frame_limit": 16, "predefined_instructions": [text]}),
    );
    let o = chatsim(
        &[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--provider",
            fixture_path.to_str().unwrap(),
        ],
        "",
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let scene: Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("out/scene.json")).unwrap())
            .unwrap();
    assert_eq!(scene["agent"]["orientation"], json!([180.0, 0.0, 0.0]));
}

#[test]
fn validate_accepts_the_oyster_ring_silently() {
    let fixtures: Value = serde_json::from_str(
        &fs::read_to_string(configs().join("fixtures/experiments.json")).unwrap(),
    )
    .unwrap();
    let reply = fixtures
        .as_object()
        .unwrap()
        .values()
        .find(|e| e["text"].as_str().unwrap().contains("oysters"))
        .unwrap()["reply"]
        .as_str()
        .unwrap()
        .to_string();
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("ring.chat");
    fs::write(&path, extract_script(&reply)).unwrap();
    let o = chatsim(&["validate", path.to_str().unwrap()], "");
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
}

#[test]
fn validate_reports_unknown_functions() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.chat");
    fs::write(&path, "launch_torpedo(1)\n").unwrap();
    let o = chatsim(&["validate", path.to_str().unwrap()], "");
    assert_eq!(o.status.code(), Some(1));
    let out = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<_> = out.lines().collect();
    assert_eq!(lines.len(), 1);
    assert!(lines[0].starts_with("1:1 UnknownFunction "), "{}", lines[0]);
}

#[test]
fn validate_reports_syntax_errors_with_position() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.chat");
    fs::write(&path, "set_yaw(90)\nset_pitch(\n").unwrap();
    let o = chatsim(&["validate", path.to_str().unwrap()], "");
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stdout)
        .unwrap()
        .contains(" ParseError "));
}

#[test]
fn validate_unreadable_path_exits_two() {
    let o = chatsim(&["validate", "/nonexistent/script.chat"], "");
    assert_eq!(o.status.code(), Some(2));
}

fn http_get(port: u16, path: &str) -> Option<String> {
    use std::io::Read;
    let mut s = std::net::TcpStream::connect(("127.0.0.1", port)).ok()?;
    write!(
        s,
        "GET {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n"
    )
    .ok()?;
    let mut out = String::new();
    s.read_to_string(&mut out).ok()?;
    Some(out)
}

#[test]
fn serve_answers_over_tcp() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), json!({}));
    let port = std::net::TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port();
    let mut child = Command::new(env!("CARGO_BIN_EXE_chatsim"))
        .args([
            "serve",
            "--config",
            cfg.to_str().unwrap(),
            "--port",
            &port.to_string(),
        ])
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let mut reply = None;
    for _ in 0..200 {
        reply = http_get(port, "/api/scene");
        if reply.is_some() {
            break;
        }
        std::thread::sleep(std::time::Duration::from_millis(25));
    }
    child.kill().unwrap();
    child.wait().unwrap();
    let reply = reply.expect("service never answered");
    assert!(reply.starts_with("HTTP/1.1 200"), "{reply}");
    assert!(reply.contains("\"agent\""));
}

#[test]
fn serve_on_a_taken_port_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), json!({}));
    let taken = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = taken.local_addr().unwrap().port().to_string();
    let o = chatsim(
        &["serve", "--config", cfg.to_str().unwrap(), "--port", &port],
        "",
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot bind"));
}

#[test]
fn committed_configs_and_fixtures_load() {
    for name in [
        "example.json",
        "exp1.json",
        "exp2.json",
        "exp3.json",
        "exp4.json",
    ] {
        chatsim_cli::config::AppConfig::load(&configs().join(name))
            .unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    let fixtures =
        chatsim_core::llm::ReplayProvider::load(&configs().join("fixtures/experiments.json"))
            .unwrap();
    assert_eq!(fixtures.len(), 5);
}
