use super::{AlignmentPath, CtcError, LabelSequence, LogProbMatrix, TokenSpan};

/// Scores this close to the best are treated as tied.
const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignOptions {
    /// Prepend a wildcard state that can absorb untranscribed lead-in audio.
    pub wildcard: bool,
    /// Constant per-frame log-score of the wildcard state.
    pub wildcard_logprob: f64,
}

impl Default for AlignOptions {
    fn default() -> Self {
        Self {
            wildcard: false,
            wildcard_logprob: -std::f64::consts::LN_2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForcedAlignment {
    pub path: AlignmentPath,
    /// One span per label token, in label order.
    pub spans: Vec<TokenSpan>,
    /// Log-score of the chosen path, wildcard frames included.
    pub score: f64,
}

#[derive(Debug, Clone, Copy)]
enum StateKind {
    Wildcard,
    Blank,
    Label(usize),
}

struct Lattice<'a> {
    kinds: Vec<StateKind>,
    labels: &'a [usize],
    emissions: &'a LogProbMatrix,
    wildcard_logprob: f64,
}

impl<'a> Lattice<'a> {
    fn new(emissions: &'a LogProbMatrix, labels: &'a [usize], options: &AlignOptions) -> Self {
        let mut kinds = Vec::with_capacity(2 * labels.len() + 2);
        if options.wildcard {
            kinds.push(StateKind::Wildcard);
        }
        kinds.push(StateKind::Blank);
        for j in 0..labels.len() {
            kinds.push(StateKind::Label(j));
            kinds.push(StateKind::Blank);
        }
        Self {
            kinds,
            labels,
            emissions,
            wildcard_logprob: options.wildcard_logprob,
        }
    }

    fn len(&self) -> usize {
        self.kinds.len()
    }

    fn emission(&self, frame: usize, state: usize) -> f64 {
        match self.kinds[state] {
            StateKind::Wildcard => self.wildcard_logprob,
            StateKind::Blank => self.emissions.get(frame, self.emissions.blank()),
            StateKind::Label(j) => self.emissions.get(frame, self.labels[j]),
        }
    }

    fn token(&self, state: usize) -> Option<usize> {
        match self.kinds[state] {
            StateKind::Label(j) => Some(self.labels[j]),
            _ => None,
        }
    }

    /// Whether `state -> state + 2` is allowed: the skipped state must be a
    /// blank and the two endpoints must not emit the same label.
    fn can_skip(&self, state: usize) -> bool {
        if state + 2 >= self.len() || !matches!(self.kinds[state + 1], StateKind::Blank) {
            return false;
        }
        match (self.kinds[state], self.token(state + 2)) {
            (StateKind::Wildcard, Some(_)) => true,
            (StateKind::Label(_), Some(next)) => self.token(state) != Some(next),
            _ => false,
        }
    }

    fn is_start(&self, state: usize) -> bool {
        match self.kinds.first() {
            Some(StateKind::Wildcard) => state <= 2,
            _ => state <= 1,
        }
    }

    fn is_final(&self, state: usize) -> bool {
        state + 2 >= self.len()
    }
}

/// Maximum-probability CTC alignment of `labels` to `emissions`.
///
/// Among equally scored paths the one whose lattice-state sequence is
/// lexicographically greatest wins, i.e. the path that advances through the
/// lattice as early as possible.
pub fn forced_align(
    emissions: &LogProbMatrix,
    labels: &LabelSequence,
    options: &AlignOptions,
) -> Result<ForcedAlignment, CtcError> {
    labels.validate(emissions.vocab_size(), emissions.blank())?;
    let frames = emissions.num_frames();
    if labels.min_frames() > frames {
        return Err(CtcError::Infeasible {
            required: labels.min_frames(),
            frames,
        });
    }
    let lattice = Lattice::new(emissions, labels.as_slice(), options);
    let states = lattice.len();

    // Suffix Viterbi: best[s] is the best score of frames t..T starting in s.
    // choice[t][s] is the successor step (0, 1 or 2) taken from s at t.
    let mut best: Vec<f64> = (0..states)
        .map(|s| {
            if lattice.is_final(s) {
                lattice.emission(frames - 1, s)
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let mut choice = vec![0u8; frames.saturating_sub(1) * states];
    let mut next = vec![f64::NEG_INFINITY; states];
    for t in (0..frames - 1).rev() {
        for s in 0..states {
            let mut candidates = [f64::NEG_INFINITY; 3];
            candidates[0] = best[s];
            if s + 1 < states {
                candidates[1] = best[s + 1];
            }
            if lattice.can_skip(s) {
                candidates[2] = best[s + 2];
            }
            let (step, value) = pick_latest(&candidates);
            choice[t * states + s] = step as u8;
            next[s] = if value == f64::NEG_INFINITY {
                value
            } else {
                value + lattice.emission(t, s)
            };
        }
        std::mem::swap(&mut best, &mut next);
    }

    let mut start_scores = [f64::NEG_INFINITY; 3];
    for (s, slot) in start_scores.iter_mut().enumerate().take(states) {
        if lattice.is_start(s) {
            *slot = best[s];
        }
    }
    let (mut state, total) = pick_latest(&start_scores);
    if total == f64::NEG_INFINITY {
        return Err(CtcError::Infeasible {
            required: labels.min_frames(),
            frames,
        });
    }

    let mut lattice_path = Vec::with_capacity(frames);
    lattice_path.push(state);
    for t in 0..frames - 1 {
        state += choice[t * states + state] as usize;
        lattice_path.push(state);
    }

    let blank = emissions.blank();
    let mut score = 0.0;
    let mut lead_in_frames = 0;
    let mut path_states = Vec::with_capacity(frames);
    let mut spans: Vec<TokenSpan> = Vec::with_capacity(labels.len());
    let mut open: Option<usize> = None;
    for (t, &s) in lattice_path.iter().enumerate() {
        let emission = lattice.emission(t, s);
        score += emission;
        match lattice.kinds[s] {
            StateKind::Wildcard => {
                lead_in_frames += 1;
                path_states.push(blank);
            }
            StateKind::Blank => path_states.push(blank),
            StateKind::Label(j) => {
                let token = lattice.labels[j];
                path_states.push(token);
                if open == Some(j) {
                    let span = spans.last_mut().expect("open span");
                    span.end_frame = t + 1;
                    span.score += emission;
                } else {
                    spans.push(TokenSpan {
                        token,
                        start_frame: t,
                        end_frame: t + 1,
                        score: emission,
                    });
                    open = Some(j);
                }
            }
        }
    }
    debug_assert_eq!(spans.len(), labels.len());

    Ok(ForcedAlignment {
        path: AlignmentPath {
            states: path_states,
            lead_in_frames,
        },
        spans,
        score,
    })
}

/// Index of the highest-numbered candidate within the tie tolerance of the max.
fn pick_latest(candidates: &[f64; 3]) -> (usize, f64) {
    let max = candidates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return (0, max);
    }
    let idx = (0..3)
        .rev()
        .find(|&i| candidates[i] >= max - TIE_TOLERANCE)
        .expect("max is attained");
    (idx, candidates[idx])
}
