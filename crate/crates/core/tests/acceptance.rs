//! Acceptance suite. Each criterion runs independently and prints one
//! PASS/FAIL line; the process exits non-zero if any criterion fails.
//!
//! Every numeric check is made against an oracle written here from scratch
//! (path enumeration, textbook edit distance, FFT) rather than against the
//! library's own helpers.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use versekit::audio::{cut_segment, decode_wav, encode_wav, peak_normalize, resample, AudioBuffer};
use versekit::corpus::{
    align_chapter, discover_pairs, emit_manifest, parse_manifest, split_dataset, synth_emissions, ChapterAlignOptions,
    ChapterPair, SegmentRecord, Split,
};
use versekit::ctc::{
    ctc_gradient, ctc_log_likelihood, ctc_loss, forced_align, greedy_decode, log_softmax, AlignOptions, LabelSequence,
    LogProbMatrix,
};
use versekit::metrics::{cer, eval_report, levenshtein, wer};
use versekit::textnorm::{build_vocab, normalize_line, NormalizedLine, BLANK_INDEX};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- oracles

/// All `v^t` frame paths.
fn all_paths(t: usize, v: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..v.pow(t as u32)).map(move |mut code| {
        let mut path = vec![0; t];
        for slot in path.iter_mut().rev() {
            *slot = code % v;
            code /= v;
        }
        path
    })
}

/// Merge repeats, then drop blanks.
fn squash(path: &[usize], blank: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut prev = None;
    for &s in path {
        if Some(s) != prev && s != blank {
            out.push(s);
        }
        prev = Some(s);
    }
    out
}

/// Lattice state sequence (blank-interleaved positions `0..2L+1`) of a path
/// that squashes to its labels.
fn lattice_states(path: &[usize], blank: usize) -> Vec<usize> {
    let mut states = Vec::with_capacity(path.len());
    let mut emitted = 0;
    let mut prev = None;
    for &s in path {
        if s == blank {
            states.push(2 * emitted);
        } else {
            if Some(s) != prev {
                emitted += 1;
            }
            states.push(2 * emitted - 1);
        }
        prev = Some(s);
    }
    states
}

fn random_log_rows(rng: &mut impl Rng, t: usize, v: usize) -> Array2<f64> {
    let mut m = Array2::zeros((t, v));
    for i in 0..t {
        let raw: Vec<f64> = (0..v).map(|_| rng.random_range(0.01..1.0)).collect();
        let sum: f64 = raw.iter().sum();
        for k in 0..v {
            m[[i, k]] = (raw[k] / sum).ln();
        }
    }
    m
}

fn random_feasible_labels(rng: &mut impl Rng, t: usize, v: usize) -> Vec<usize> {
    loop {
        let len = rng.random_range(1..=t);
        let labels: Vec<usize> = (0..len).map(|_| rng.random_range(1..v)).collect();
        let repeats = labels.windows(2).filter(|w| w[0] == w[1]).count();
        if labels.len() + repeats <= t {
            return labels;
        }
    }
}

/// Textbook Wagner-Fischer distance.
fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        d[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

// ---------------------------------------------------------------- criteria

fn ctc_likelihood_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let t = rng.random_range(1..=6);
        let v = rng.random_range(2..=4);
        let values = random_log_rows(&mut rng, t, v);
        let labels = random_feasible_labels(&mut rng, t, v);
        let brute: f64 = all_paths(t, v)
            .filter(|p| squash(p, BLANK_INDEX) == labels)
            .map(|p| p.iter().enumerate().map(|(i, &s)| values[[i, s]].exp()).product::<f64>())
            .sum();
        let e = LogProbMatrix::new(values, 0.02, BLANK_INDEX).map_err(|e| e.to_string())?;
        let got = ctc_log_likelihood(&e, &LabelSequence::new(labels.clone()))
            .map_err(|e| e.to_string())?
            .exp();
        let diff = (got - brute).abs();
        worst = worst.max(diff);
        check(diff <= 1e-9, || format!("case {case}: T={t} V={v} labels={labels:?}: {got} vs {brute}"))?;
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs < 10.0, || format!("took {secs:.2}s"))?;
    Ok(format!("200 instances, max |p - brute| = {worst:.1e}, {secs:.2}s"))
}

fn ctc_gradient_check() -> Outcome {
    const STEP: f64 = 1e-5;
    const REL_TOL: f64 = 1e-4;
    // below this magnitude the relative error is taken against the floor
    const FLOOR: f64 = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_rel = 0.0f64;
    let mut worst_row = 0.0f64;
    let mut floored = 0;
    let loss = |logits: &Array2<f64>, labels: &LabelSequence| -> f64 {
        let e = LogProbMatrix::new(log_softmax(logits.view()), 0.02, BLANK_INDEX).unwrap();
        ctc_loss(&e, labels).unwrap()
    };
    for case in 0..100 {
        let t = rng.random_range(1..=5);
        let v = rng.random_range(2..=4);
        let logits = Array2::from_shape_fn((t, v), |_| rng.random_range(-3.0..3.0));
        let labels = LabelSequence::new(random_feasible_labels(&mut rng, t, v));
        let grad = ctc_gradient(logits.view(), &labels, BLANK_INDEX).map_err(|e| e.to_string())?;
        for i in 0..t {
            let row_sum: f64 = grad.row(i).sum();
            worst_row = worst_row.max(row_sum.abs());
            check(row_sum.abs() <= 1e-9, || format!("case {case}: row {i} sums to {row_sum}"))?;
            for k in 0..v {
                let mut plus = logits.clone();
                plus[[i, k]] += STEP;
                let mut minus = logits.clone();
                minus[[i, k]] -= STEP;
                let numeric = (loss(&plus, &labels) - loss(&minus, &labels)) / (2.0 * STEP);
                let analytic = grad[[i, k]];
                let scale = analytic.abs().max(numeric.abs());
                if scale < FLOOR {
                    floored += 1;
                }
                let rel = (analytic - numeric).abs() / scale.max(FLOOR);
                worst_rel = worst_rel.max(rel);
                check(rel <= REL_TOL, || {
                    format!("case {case}: d/dlogit[{i},{k}] analytic {analytic} numeric {numeric} (rel {rel:.2e})")
                })?;
            }
        }
    }
    Ok(format!(
        "100 instances, max rel err {worst_rel:.1e} ({floored} entries under the {FLOOR:.0e} floor), max |row sum| {worst_row:.1e}"
    ))
}

fn forced_align_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut instances = 0;
    let mut ties = 0;
    for t in 1..=6usize {
        for v in 2..=3usize {
            // every label sequence over the non-blank tokens that fits in t frames
            let mut label_sets = vec![];
            for len in 1..=t {
                for code in 0..(v - 1).pow(len as u32) {
                    let mut c = code;
                    let labels: Vec<usize> = (0..len)
                        .map(|_| {
                            let l = 1 + c % (v - 1);
                            c /= v - 1;
                            l
                        })
                        .collect();
                    let repeats = labels.windows(2).filter(|w| w[0] == w[1]).count();
                    if len + repeats <= t {
                        label_sets.push(labels);
                    }
                }
            }
            for labels in label_sets {
                // continuous scores, coarse scores that tie often, and a flat matrix
                let draws = [
                    random_log_rows(&mut rng, t, v),
                    Array2::from_shape_fn((t, v), |_| [0.2f64, 0.3, 0.5][rng.random_range(0..3)].ln()),
                    Array2::from_elem((t, v), (1.0 / v as f64).ln()),
                ];
                for values in draws {
                    let values = log_softmax(values.view());
                    let mut best = f64::NEG_INFINITY;
                    let mut scored = vec![];
                    for p in all_paths(t, v).filter(|p| squash(p, BLANK_INDEX) == labels) {
                        let score: f64 = p.iter().enumerate().map(|(i, &s)| values[[i, s]]).sum();
                        best = best.max(score);
                        scored.push((score, p));
                    }
                    let tied: Vec<&(f64, Vec<usize>)> = scored.iter().filter(|(s, _)| *s >= best - 1e-9).collect();
                    if tied.len() > 1 {
                        ties += 1;
                    }
                    let expected = tied
                        .iter()
                        .max_by(|a, b| lattice_states(&a.1, BLANK_INDEX).cmp(&lattice_states(&b.1, BLANK_INDEX)))
                        .map(|(_, p)| p.clone())
                        .unwrap();

                    let e = LogProbMatrix::new(values, 0.02, BLANK_INDEX).map_err(|e| e.to_string())?;
                    let a = forced_align(&e, &LabelSequence::new(labels.clone()), &AlignOptions::default())
                        .map_err(|e| e.to_string())?;
                    check((a.score - best).abs() <= 1e-9, || {
                        format!("T={t} V={v} {labels:?}: score {} vs exhaustive {best}", a.score)
                    })?;
                    check(a.path.states == expected, || {
                        format!("T={t} V={v} {labels:?}: path {:?} vs {expected:?}", a.path.states)
                    })?;
                    let span_tokens: Vec<usize> = a.spans.iter().map(|s| s.token).collect();
                    check(span_tokens == labels, || format!("spans {span_tokens:?} vs labels {labels:?}"))?;
                    for s in &a.spans {
                        check(a.path.states[s.start_frame..s.end_frame].iter().all(|&x| x == s.token), || {
                            format!("span {s:?} disagrees with path {:?}", a.path.states)
                        })?;
                    }
                    instances += 1;
                }
            }
        }
    }
    Ok(format!("{instances} instances (T<=6, V<=3, every feasible label sequence), {ties} with tied optima"))
}

fn hand_check_fixture() -> Outcome {
    let half = 0.5f64.ln();
    let e = LogProbMatrix::from_rows(&[vec![half, half], vec![half, half]], 0.02, 0).map_err(|e| e.to_string())?;
    let loss = ctc_loss(&e, &LabelSequence::new(vec![1])).map_err(|e| e.to_string())?;
    let expected = -(0.75f64.ln());
    check((loss - expected).abs() <= 1e-12, || format!("loss {loss} vs {expected}"))?;
    check((loss - 0.287682).abs() < 5e-7, || format!("loss {loss} is not 0.287682"))?;
    Ok(format!("loss {loss:.12} = -ln 0.75"))
}

fn random_sentence(rng: &mut impl Rng, alphabet: &[&str], max_words: usize) -> String {
    let n = rng.random_range(0..=max_words);
    (0..n)
        .map(|_| {
            let len = rng.random_range(1..=3);
            (0..len).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect::<String>()
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn metrics_oracle() -> Outcome {
    use unicode_segmentation::UnicodeSegmentation;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let alphabet = ["a", "b", "c", "ọ", "ụ", "n\u{301}"];
    let mut compared = 0;
    while compared < 500 {
        let r = random_sentence(&mut rng, &alphabet, 8);
        let h = random_sentence(&mut rng, &alphabet, 8);
        if r.is_empty() {
            continue;
        }
        let rw: Vec<&str> = r.split_whitespace().collect();
        let hw: Vec<&str> = h.split_whitespace().collect();
        let rc: Vec<&str> = r.graphemes(true).collect();
        let hc: Vec<&str> = h.graphemes(true).collect();
        let w_expected = edit_distance(&rw, &hw) as f64 / rw.len() as f64;
        let c_expected = edit_distance(&rc, &hc) as f64 / rc.len() as f64;
        check(wer(&r, &h) == w_expected, || format!("wer({r:?}, {h:?}) = {} vs {w_expected}", wer(&r, &h)))?;
        check(cer(&r, &h) == c_expected, || format!("cer({r:?}, {h:?}) = {} vs {c_expected}", cer(&r, &h)))?;
        check(levenshtein(&rw, &hw).errors() == edit_distance(&rw, &hw), || format!("{r:?} / {h:?}"))?;
        compared += 1;
    }
    let third = wer("a b c", "a x c");
    check(third == 1.0 / 3.0, || format!("wer(a b c, a x c) = {third}"))?;

    // pooled rate over several segments
    let mut records = vec![];
    let mut hyps = vec![];
    let mut errors = 0;
    let mut words = 0;
    for i in 0..12 {
        let r = random_sentence(&mut rng, &alphabet, 10);
        let r = if r.is_empty() { "a".to_string() } else { r };
        let h = random_sentence(&mut rng, &alphabet, 10);
        let rw: Vec<&str> = r.split_whitespace().collect();
        let hw: Vec<&str> = h.split_whitespace().collect();
        errors += edit_distance(&rw, &hw);
        words += rw.len();
        let id = format!("seg{i}");
        records.push(SegmentRecord::new(&id, "", 0.0, 1.0, &r, &r, ""));
        hyps.push((id, h));
    }
    let report = eval_report(&records, &hyps).map_err(|e| e.to_string())?;
    let pooled = errors as f64 / words as f64;
    check(report.wer() == pooled, || format!("pooled WER {} vs {pooled}", report.wer()))?;
    let mean: f64 = report.segments.iter().map(|s| s.words.rate()).sum::<f64>() / 12.0;
    Ok(format!(
        "500 random pairs exact, wer(a b c, a x c) = 1/3, pooled {errors}/{words} = {pooled:.6} (segment mean {mean:.6})"
    ))
}

const WORDS: [&str; 12] = [
    "mmalite", "ozi", "ọma", "jizọs", "kraịst", "dịka", "e", "dere", "n'akwụkwọ", "aịsaịa", "onye", "amụma",
];

fn end_to_end_corpus() -> Outcome {
    const FPT: usize = 3;
    const FD: f64 = 0.02;
    const SAMPLES_PER_FRAME: usize = 320;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;

    // five chapters, two verses each
    let chapters: Vec<(String, Vec<String>)> = (1..=5)
        .map(|c| {
            let verses = (0..2)
                .map(|_| {
                    let n = rng.random_range(2..=6);
                    let mut v: Vec<String> = (0..n).map(|_| WORDS[rng.random_range(0..WORDS.len())].into()).collect();
                    let mut chars = v[0].chars();
                    let first = chars.next().unwrap();
                    v[0] = first.to_uppercase().chain(chars).collect();
                    v.join(" ") + "."
                })
                .collect();
            (format!("John_{c:02}"), verses)
        })
        .collect();
    let all: Vec<NormalizedLine> =
        chapters.iter().flat_map(|(_, vs)| vs.iter().map(|v| normalize_line(v))).collect();
    let vocab = build_vocab(&all).map_err(|e| e.to_string())?;

    let mut records = vec![];
    let mut hyps = vec![];
    for (chapter, verses) in &chapters {
        let normalized: Vec<NormalizedLine> = verses.iter().map(|v| normalize_line(v)).collect();
        let joined = normalized.iter().map(|n| n.as_str()).collect::<Vec<_>>().join(" ");
        let emissions = synth_emissions(&NormalizedLine::from_normalized(joined.clone()), &vocab, FPT, FD)
            .map_err(|e| e.to_string())?;

        // boundaries by construction: walk the graphemes the way the path is laid out
        let mut expected = vec![];
        let mut frame = 0;
        let mut prev: Option<&str> = None;
        let clusters: Vec<Vec<&str>> = normalized.iter().map(|n| n.graphemes().collect()).collect();
        for (vi, verse) in clusters.iter().enumerate() {
            if vi > 0 {
                if prev == Some(" ") {
                    frame += 1;
                }
                frame += FPT; // delimiter
                prev = Some(" ");
            }
            let mut start = None;
            for &g in verse {
                if prev == Some(g) {
                    frame += 1;
                }
                start.get_or_insert(frame);
                frame += FPT;
                prev = Some(g);
            }
            expected.push((start.unwrap(), frame));
        }
        check(frame == emissions.num_frames(), || format!("{chapter}: constructed {frame} frames"))?;

        let pair = ChapterPair {
            chapter_id: chapter.clone(),
            audio_path: dir.path().join(format!("{chapter}.wav")),
            text_path: dir.path().join(format!("{chapter}.txt")),
            verse_lines: verses.clone(),
        };
        let options = ChapterAlignOptions {
            segment_dir: "segments".into(),
            ..Default::default()
        };
        let aligned = align_chapter(&pair, &emissions, &vocab, &options).map_err(|e| e.to_string())?;
        check(aligned.frame_spans == expected, || {
            format!("{chapter}: boundaries {:?} vs construction {expected:?}", aligned.frame_spans)
        })?;

        // chapter audio, quantized through a WAV round trip, then cut
        let samples: Vec<f32> = (0..frame * SAMPLES_PER_FRAME).map(|_| rng.random_range(-0.5..0.5)).collect();
        let audio = decode_wav(&encode_wav(&AudioBuffer::mono(samples, 16000).unwrap())).map_err(|e| e.to_string())?;
        let mut rebuilt: Vec<f32> = vec![];
        let mut cursor = 0;
        for (record, &(s, e)) in aligned.records.iter().zip(&aligned.frame_spans) {
            check(s >= cursor && e > s, || format!("{}: span ({s}, {e}) overlaps", record.id))?;
            if s > cursor {
                rebuilt.extend(cut_segment(&audio, cursor, s, FD).map_err(|e| e.to_string())?.samples());
            }
            let seg = cut_segment(&audio, s, e, FD).map_err(|e| e.to_string())?;
            let seg = decode_wav(&encode_wav(&seg)).map_err(|e| e.to_string())?;
            check(seg.samples().len() == (e - s) * SAMPLES_PER_FRAME, || format!("{}: length", record.id))?;
            rebuilt.extend(seg.samples());
            cursor = e;

            let decoded = greedy_decode(&emissions.slice_frames(s, e).map_err(|e| e.to_string())?);
            hyps.push((record.id.clone(), vocab.decode(decoded.as_slice())));
        }
        if cursor < frame {
            rebuilt.extend(cut_segment(&audio, cursor, frame, FD).map_err(|e| e.to_string())?.samples());
        }
        check(rebuilt == audio.samples(), || format!("{chapter}: segment and gap cuts do not rebuild the audio"))?;
        records.extend(aligned.records);
    }

    let report = eval_report(&records, &hyps).map_err(|e| e.to_string())?;
    check(report.wer() == 0.0 && report.cer() == 0.0, || {
        format!("WER {} CER {}", report.wer(), report.cer())
    })?;

    let mut buf = vec![];
    emit_manifest(&records, &mut buf).map_err(|e| e.to_string())?;
    let text = String::from_utf8(buf).map_err(|e| e.to_string())?;
    let parsed = parse_manifest(&text).map_err(|e| e.to_string())?;
    check(parsed == records, || "manifest does not round-trip".into())?;
    for line in text.lines() {
        let obj: BTreeMap<String, serde_json::Value> = serde_json::from_str(line).map_err(|e| e.to_string())?;
        for key in ["audio_start_sec", "audio_filepath", "duration", "text", "normalized_text", "uroman_tokens"] {
            check(obj.contains_key(key), || format!("manifest line lacks {key}"))?;
        }
    }

    check(records.len() == 10, || format!("{} segments", records.len()))?;
    let a = split_dataset(records.clone(), 0.8, 2024).map_err(|e| e.to_string())?;
    let b = split_dataset(records, 0.8, 2024).map_err(|e| e.to_string())?;
    let train = a.iter().filter(|r| r.split == Split::Train).count();
    let test = a.iter().filter(|r| r.split == Split::Test).count();
    check((train, test) == (8, 2), || format!("split {train}/{test}"))?;
    check(a == b, || "split differs between runs with the same seed".into())?;
    Ok(format!(
        "5 chapters, 10 segments, boundaries exact, cuts rebuild audio, WER {:.1} CER {:.1}, split {train}/{test}",
        report.wer(),
        report.cer()
    ))
}

fn dsp_checks() -> Outcome {
    let input: Vec<f32> = (0..44100)
        .map(|n| (2.0 * std::f64::consts::PI * 440.0 * n as f64 / 44100.0).sin() as f32 * 0.8)
        .collect();
    let out = resample(&input, 44100, 16000);
    check(out.len().abs_diff(16000) <= 1, || format!("length {}", out.len()))?;

    let mut spectrum: Vec<Complex<f64>> = out.iter().map(|&s| Complex::new(s as f64, 0.0)).collect();
    let n = spectrum.len();
    FftPlanner::new().plan_fft_forward(n).process(&mut spectrum);
    let (bin, _) = spectrum[..n / 2]
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .unwrap();
    let freq = bin as f64 * 16000.0 / n as f64;
    check((freq - 440.0).abs() <= 1.0, || format!("peak at {freq} Hz"))?;

    let buf = AudioBuffer::mono(out, 16000).map_err(|e| e.to_string())?;
    let target = 10f64.powf(-1.0 / 20.0);
    let once = peak_normalize(&buf, -1.0);
    check((once.peak() as f64 - target).abs() <= 1e-6, || format!("peak {} vs {target}", once.peak()))?;
    let twice = peak_normalize(&once, -1.0);
    let drift = once
        .samples()
        .iter()
        .zip(twice.samples())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f32, f32::max);
    check(drift <= 1e-6, || format!("second normalization moved samples by {drift}"))?;
    Ok(format!("{n} samples, peak {freq:.1} Hz, normalized peak {:.7}, idempotent", once.peak()))
}

fn pair_discovery() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let audio = dir.path().join("audio");
    let text = dir.path().join("text");
    std::fs::create_dir_all(&audio).map_err(|e| e.to_string())?;
    std::fs::create_dir_all(&text).map_err(|e| e.to_string())?;
    std::fs::write(audio.join("B01__01_Matthew__IKKTBLN1DA.MP3"), b"ID3").map_err(|e| e.to_string())?;
    std::fs::write(text.join("ikkNT_070_MAT_01_read.txt"), "Akwụkwọ ọmụmụ Jizọs Kraịst.\n")
        .map_err(|e| e.to_string())?;
    let found = discover_pairs(&audio, &text).map_err(|e| e.to_string())?;
    let ids: Vec<&str> = found.pairs.iter().map(|p| p.chapter_id.as_str()).collect();
    check(ids == ["Matthew_01"], || format!("pairs {ids:?}"))?;
    check(found.unmatched.is_empty(), || format!("unmatched {:?}", found.unmatched))?;
    Ok("B01__01_Matthew__IKKTBLN1DA.MP3 + ikkNT_070_MAT_01_read.txt -> Matthew_01".into())
}

fn word(i: usize) -> String {
    let mut i = i % 5000;
    let mut s = String::new();
    loop {
        s.push((b'a' + (i % 26) as u8) as char);
        i /= 26;
        if i == 0 {
            return s;
        }
    }
}

fn report_formatting() -> Outcome {
    // 1,000,000 reference words; the hypothesis keeps only the last 462,259,
    // so there are exactly 537,741 deletions
    let reference: Vec<String> = (0..1_000_000).map(word).collect();
    let hypothesis = reference[537_741..].join(" ");
    let reference = reference.join(" ");
    let records = [SegmentRecord::new("w", "", 0.0, 1.0, &reference, &reference, "")];
    let report = eval_report(&records, &[("w".into(), hypothesis)]).map_err(|e| e.to_string())?;
    let table = report.render_table();
    check(report.words().errors() == 537_741 && report.words().reference_length == 1_000_000, || {
        format!("{:?}", report.words())
    })?;
    check(table.contains("WER: 0.537741"), || format!("table tail: {:?}", table.lines().rev().nth(1)))?;

    // 1,000,000 reference characters, 265,053 of them deleted
    let reference = "a".repeat(1_000_000);
    let hypothesis = "a".repeat(1_000_000 - 265_053);
    let records = [SegmentRecord::new("c", "", 0.0, 1.0, &reference, &reference, "")];
    let report = eval_report(&records, &[("c".into(), hypothesis)]).map_err(|e| e.to_string())?;
    let table = report.render_table();
    check(table.contains("CER: 0.265053"), || format!("table tail: {:?}", table.lines().last()))?;
    Ok("WER: 0.537741 (537741 / 1000000 words), CER: 0.265053 (265053 / 1000000 chars)".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("ctc likelihood vs path enumeration", ctc_likelihood_oracle),
        ("ctc gradient vs finite differences", ctc_gradient_check),
        ("forced alignment vs exhaustive search", forced_align_oracle),
        ("uniform T=2 loss = -ln 0.75", hand_check_fixture),
        ("wer/cer vs edit-distance oracle", metrics_oracle),
        ("end-to-end synthetic corpus", end_to_end_corpus),
        ("resampling and peak normalization", dsp_checks),
        ("pair discovery of source file names", pair_discovery),
        ("report formatting to 6 decimals", report_formatting),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS  {name}: {detail} [{secs:.2}s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why} [{secs:.2}s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
