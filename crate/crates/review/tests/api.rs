use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;
use versekit::audio::{write_wav, AudioBuffer};
use versekit::corpus::{compute_quality_stats, filter_segments, write_manifest, FilterRules, QualityTag, SegmentRecord};
use versekit_review::{router, ReviewOptions, ReviewState};

/// Writes `n` segments (the first one silent) and their manifest into `dir`.
fn fixture(dir: &Path, n: usize) {
    std::fs::create_dir_all(dir.join("segments")).unwrap();
    let records: Vec<SegmentRecord> = (0..n)
        .map(|i| {
            let id = format!("Luke_02_{:03}", i + 1);
            let samples: Vec<f32> = if i == 0 {
                vec![0.0; 4000]
            } else {
                (0..4000 + 100 * i).map(|k| ((k as f32) * 0.05).sin() * 0.5).collect()
            };
            let rel = format!("segments/{id}.wav");
            write_wav(&AudioBuffer::mono(samples, 16000).unwrap(), dir.join(&rel)).unwrap();
            let text = format!("verse {} words here", i + 1);
            compute_quality_stats(&SegmentRecord::new(&id, rel, i as f64, 0.25 + i as f64 * 0.00625, &text, &text, ""))
                .unwrap()
        })
        .collect();
    write_manifest(&records, dir.join("manifest.jsonl")).unwrap();
}

fn app(dir: &Path) -> (Arc<ReviewState>, Router) {
    let state = Arc::new(
        ReviewState::load(dir.join("manifest.jsonl"), dir.join("tags.jsonl"), ReviewOptions::default()).unwrap(),
    );
    (Arc::clone(&state), router(state))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let request = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

async fn call_json(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, bytes) = call(app, method, uri, body).await;
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

fn ids(page: &Value) -> Vec<String> {
    page["segments"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["id"].as_str().unwrap().to_string())
        .collect()
}

#[tokio::test]
async fn fresh_manifest_is_all_untagged() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), 10);
    let (_, app) = app(dir.path());
    let (status, page) = call_json(&app, "GET", "/api/segments?filter=Untagged&page_size=100", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(page["total"], 10);
    assert_eq!(ids(&page).len(), 10);
    let (_, stats) = call_json(&app, "GET", "/api/stats", None).await;
    assert_eq!(stats["total"], 10);
    assert_eq!(stats["counts"]["Untagged"], 10);
}

#[tokio::test]
async fn pagination_is_stable_and_tolerant() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), 25);
    let (_, app) = app(dir.path());
    let mut seen = Vec::new();
    for (page, expected) in [(1, 10), (2, 10), (3, 5)] {
        let (_, body) = call_json(&app, "GET", &format!("/api/segments?page={page}&page_size=10"), None).await;
        assert_eq!(body["pages"], 3);
        let got = ids(&body);
        assert_eq!(got.len(), expected);
        seen.extend(got);
    }
    let mut sorted = seen.clone();
    sorted.sort();
    assert_eq!(seen, sorted);
    assert_eq!(seen.len(), 25);
    let (status, body) = call_json(&app, "GET", "/api/segments?page=9&page_size=10", None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(ids(&body).is_empty());
    let (status, _) = call_json(&app, "GET", "/api/segments?page=0", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, body) = call_json(&app, "GET", "/api/segments?filter=Great", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(body["allowed"].as_array().unwrap().contains(&json!("High")));
}

#[tokio::test]
async fn tagging_rules() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), 5);
    let (_, app) = app(dir.path());
    let uri = "/api/segments/Luke_02_002/tag";
    let (status, entry) = call_json(&app, "POST", uri, Some(json!({"tag": "High", "note": "clean"}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(entry["tag"], "High");
    let (_, page) = call_json(&app, "GET", "/api/segments?filter=High", None).await;
    assert_eq!(ids(&page), ["Luke_02_002"]);
    assert_eq!(page["segments"][0]["note"], "clean");

    call_json(&app, "POST", uri, Some(json!({"tag": "Low"}))).await;
    let (_, page) = call_json(&app, "GET", "/api/segments?filter=Low", None).await;
    assert_eq!(ids(&page), ["Luke_02_002"]);
    let (_, page) = call_json(&app, "GET", "/api/segments?filter=High", None).await;
    assert!(ids(&page).is_empty());

    let (status, body) = call_json(&app, "POST", uri, Some(json!({"tag": "Great"}))).await;
    assert!(status.is_client_error());
    assert_eq!(body["allowed"], json!(["High", "Low", "Fixable"]));
    let (status, _) = call_json(&app, "POST", uri, Some(json!({"tag": "Untagged"}))).await;
    assert!(status.is_client_error());
    let (status, _) = call_json(&app, "POST", uri, Some(json!({"note": "no tag"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call_json(&app, "POST", "/api/segments/Nope_01_001/tag", Some(json!({"tag": "High"}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn stats_counts_always_sum_to_total() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), 8);
    let (_, app) = app(dir.path());
    let ops = [(1, "High"), (2, "Low"), (1, "Fixable"), (5, "High"), (8, "Low"), (5, "High")];
    for (k, (i, tag)) in ops.iter().enumerate() {
        let uri = format!("/api/segments/Luke_02_{i:03}/tag");
        call_json(&app, "POST", &uri, Some(json!({ "tag": tag }))).await;
        let (_, stats) = call_json(&app, "GET", "/api/stats", None).await;
        let c = &stats["counts"];
        let sum: u64 = ["High", "Low", "Fixable", "Untagged"].iter().map(|t| c[t].as_u64().unwrap()).sum();
        assert_eq!(sum, 8, "after op {k}");
    }
    let (_, stats) = call_json(&app, "GET", "/api/stats", None).await;
    assert_eq!(stats["counts"]["Untagged"], 4);
    assert_eq!(stats["counts"]["High"], 1);
    assert_eq!(stats["counts"]["Fixable"], 1);
    assert_eq!(stats["reviewed"], 4);
}

#[tokio::test]
async fn audio_and_peaks() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), 3);
    let (_, app) = app(dir.path());
    let (status, bytes) = call(&app, "GET", "/api/segments/Luke_02_002/audio", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(&bytes[..4], b"RIFF");

    let (status, peaks) = call_json(&app, "GET", "/api/segments/Luke_02_001/peaks", None).await;
    assert_eq!(status, StatusCode::OK);
    let pairs = peaks["peaks"].as_array().unwrap();
    assert_eq!(pairs.len(), 800);
    assert!(pairs.iter().all(|p| p == &json!([0.0, 0.0])));
    let (_, peaks) = call_json(&app, "GET", "/api/segments/Luke_02_002/peaks?buckets=5000", None).await;
    assert_eq!(peaks["peaks"].as_array().unwrap().len(), 4100);
    assert_eq!(peaks["samples"], 4100);

    let (status, _) = call(&app, "GET", "/api/segments/Luke_09_001/audio", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    std::fs::remove_file(dir.path().join("segments/Luke_02_003.wav")).unwrap();
    let (status, body) = call_json(&app, "GET", "/api/segments/Luke_02_003/audio", None).await;
    assert_eq!(status, StatusCode::GONE);
    assert!(body["path"].as_str().unwrap().ends_with("Luke_02_003.wav"));
    let (status, _) = call_json(&app, "GET", "/api/segments/Luke_02_003/peaks", None).await;
    assert_eq!(status, StatusCode::GONE);
}

#[tokio::test]
async fn static_files_are_served_when_configured() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), 1);
    let www = dir.path().join("www");
    std::fs::create_dir_all(&www).unwrap();
    std::fs::write(www.join("index.html"), "<h1>review</h1>").unwrap();
    let options = ReviewOptions {
        static_dir: Some(www),
        ..Default::default()
    };
    let state =
        ReviewState::load(dir.path().join("manifest.jsonl"), dir.path().join("tags.jsonl"), options).unwrap();
    let app = router(Arc::new(state));
    let (status, body) = call(&app, "GET", "/", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, b"<h1>review</h1>");
    let (status, _) = call(&app, "GET", "/api/stats", None).await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test]
async fn concurrent_tags_on_distinct_ids_are_all_kept() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), 10);
    let (_, app) = app(dir.path());
    let mut handles = Vec::new();
    for i in 1..=10 {
        let app = app.clone();
        handles.push(tokio::spawn(async move {
            let uri = format!("/api/segments/Luke_02_{i:03}/tag");
            call_json(&app, "POST", &uri, Some(json!({"tag": "Fixable"}))).await.0
        }));
    }
    for h in handles {
        assert_eq!(h.await.unwrap(), StatusCode::OK);
    }
    let (_, app) = self::app(dir.path());
    let (_, stats) = call_json(&app, "GET", "/api/stats", None).await;
    assert_eq!(stats["counts"]["Fixable"], 10);
}

/// Tag three segments, drop the service, start a new one on the same files
/// and check the High filter keeps exactly those three.
#[tokio::test]
async fn tags_survive_restart_and_drive_filtering() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), 10);
    let chosen = ["Luke_02_003", "Luke_02_007", "Luke_02_010"];
    {
        let (_, app) = app(dir.path());
        for id in chosen {
            let (status, _) =
                call_json(&app, "POST", &format!("/api/segments/{id}/tag"), Some(json!({"tag": "High"}))).await;
            assert_eq!(status, StatusCode::OK);
        }
        call_json(&app, "POST", "/api/segments/Luke_02_001/tag", Some(json!({"tag": "Low"}))).await;
    }
    let (state, app) = app(dir.path());
    let (_, page) = call_json(&app, "GET", "/api/segments?filter=High", None).await;
    assert_eq!(ids(&page), chosen);
    let rules = FilterRules {
        require_tag_high: true,
        ..FilterRules::disabled()
    };
    let outcome = filter_segments(state.tagged_records(), &rules).unwrap();
    let kept: Vec<&str> = outcome.kept.iter().map(|r| r.id.as_str()).collect();
    assert_eq!(kept, chosen);
    assert_eq!(outcome.rejected.len(), 7);
    assert!(outcome.kept.iter().all(|r| r.quality_tag == QualityTag::High));
}
