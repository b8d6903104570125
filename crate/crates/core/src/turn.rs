//! Duplex floor control: barge-in after a number of participant words
//! spoken over the agent, idle nudges during participant silence, and a hard
//! silence timeout.
//!
//! [`step`] is a pure transition function over [`FloorState`]; the session
//! driver owns one floor per call and feeds it timestamped events.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TurnTakingConfig {
    pub barge_in_word_threshold: u32,
    pub idle_delay_ms: u64,
    pub max_idle_messages: u32,
    pub silence_timeout_ms: u64,
}

impl Default for TurnTakingConfig {
    fn default() -> Self {
        Self {
            barge_in_word_threshold: 3,
            idle_delay_ms: 6_000,
            max_idle_messages: 2,
            silence_timeout_ms: 30_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("{0} must be positive")]
    NotPositive(&'static str),
    #[error("idle_delay_ms ({idle}) must be below silence_timeout_ms ({timeout})")]
    IdleNotBelowTimeout { idle: u64, timeout: u64 },
}

impl TurnTakingConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.barge_in_word_threshold == 0 {
            return Err(ConfigError::NotPositive("barge_in_word_threshold"));
        }
        if self.idle_delay_ms == 0 {
            return Err(ConfigError::NotPositive("idle_delay_ms"));
        }
        if self.max_idle_messages == 0 {
            return Err(ConfigError::NotPositive("max_idle_messages"));
        }
        if self.idle_delay_ms >= self.silence_timeout_ms {
            return Err(ConfigError::IdleNotBelowTimeout {
                idle: self.idle_delay_ms,
                timeout: self.silence_timeout_ms,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FloorMode {
    AiSpeaking,
    Listening,
    ParticipantSpeaking,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FloorState {
    pub mode: FloorMode,
    /// Participant words heard since the current agent utterance started.
    pub words_during_ai_speech: u32,
    /// Whether the current agent utterance was already interrupted.
    pub interrupted: bool,
    /// Start of the current participant-silence episode, if one is open.
    pub silence_since_ms: Option<u64>,
    /// Reference point for the next idle nudge.
    pub idle_anchor_ms: u64,
    pub idle_messages_sent: u32,
    pub silence_timeout_fired: bool,
    pub last_ts_ms: u64,
}

impl FloorState {
    /// A fresh floor at call pickup. The silence clock starts when the
    /// agent first stops talking.
    pub fn new(now_ms: u64) -> Self {
        Self {
            mode: FloorMode::Listening,
            words_during_ai_speech: 0,
            interrupted: false,
            silence_since_ms: None,
            idle_anchor_ms: now_ms,
            idle_messages_sent: 0,
            silence_timeout_fired: false,
            last_ts_ms: now_ms,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FloorEvent {
    AiSpeechStart(u64),
    AiSpeechEnd(u64),
    UserWord(u64),
    SilenceTick(u64),
}

impl FloorEvent {
    pub fn ts(&self) -> u64 {
        match *self {
            FloorEvent::AiSpeechStart(t)
            | FloorEvent::AiSpeechEnd(t)
            | FloorEvent::UserWord(t)
            | FloorEvent::SilenceTick(t) => t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FloorEffect {
    InterruptAi,
    EmitIdlePrompt,
    EndCallSilence,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("floor event at {got} ms precedes previous event at {last} ms")]
pub struct OutOfOrder {
    pub last: u64,
    pub got: u64,
}

/// Advances the floor by one event.
pub fn step(
    floor: &FloorState,
    event: FloorEvent,
    config: &TurnTakingConfig,
) -> Result<(FloorState, Vec<FloorEffect>), OutOfOrder> {
    let ts = event.ts();
    if ts < floor.last_ts_ms {
        return Err(OutOfOrder { last: floor.last_ts_ms, got: ts });
    }
    let mut next = floor.clone();
    next.last_ts_ms = ts;
    let mut effects = Vec::new();

    match event {
        FloorEvent::AiSpeechStart(_) => {
            next.mode = FloorMode::AiSpeaking;
            next.words_during_ai_speech = 0;
            next.interrupted = false;
        }
        FloorEvent::AiSpeechEnd(_) => {
            if next.mode == FloorMode::AiSpeaking {
                next.mode = FloorMode::Listening;
                next.idle_anchor_ms = ts;
                if next.silence_since_ms.is_none() {
                    next.silence_since_ms = Some(ts);
                }
            }
        }
        FloorEvent::UserWord(_) => {
            next.silence_since_ms = None;
            next.idle_messages_sent = 0;
            match next.mode {
                FloorMode::AiSpeaking => {
                    next.words_during_ai_speech += 1;
                    if !next.interrupted
                        && next.words_during_ai_speech >= config.barge_in_word_threshold
                    {
                        next.interrupted = true;
                        next.mode = FloorMode::ParticipantSpeaking;
                        effects.push(FloorEffect::InterruptAi);
                    }
                }
                FloorMode::Listening | FloorMode::ParticipantSpeaking => {
                    next.mode = FloorMode::ParticipantSpeaking;
                }
            }
        }
        FloorEvent::SilenceTick(now) => {
            if next.mode == FloorMode::Listening && !next.silence_timeout_fired {
                if let Some(since) = next.silence_since_ms {
                    if now.saturating_sub(since) >= config.silence_timeout_ms {
                        next.silence_timeout_fired = true;
                        effects.push(FloorEffect::EndCallSilence);
                    } else if now.saturating_sub(next.idle_anchor_ms) >= config.idle_delay_ms
                        && next.idle_messages_sent < config.max_idle_messages
                    {
                        next.idle_messages_sent += 1;
                        next.idle_anchor_ms = now;
                        effects.push(FloorEffect::EmitIdlePrompt);
                    }
                }
            }
        }
    }
    Ok((next, effects))
}

/// Signals the end of a participant turn (the transcript was finalized):
/// the floor returns to listening without opening a silence episode, since
/// the agent is expected to answer.
pub fn participant_turn_done(floor: &FloorState) -> FloorState {
    let mut next = floor.clone();
    if next.mode == FloorMode::ParticipantSpeaking {
        next.mode = FloorMode::Listening;
    }
    next
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(floor: &mut FloorState, ev: FloorEvent, cfg: &TurnTakingConfig) -> Vec<FloorEffect> {
        let (f, e) = step(floor, ev, cfg).unwrap();
        *floor = f;
        e
    }

    #[test]
    fn barge_in_threshold_boundary() {
        let cfg = TurnTakingConfig::default();
        let mut f = FloorState::new(0);
        run(&mut f, FloorEvent::AiSpeechStart(0), &cfg);
        assert!(run(&mut f, FloorEvent::UserWord(100), &cfg).is_empty());
        assert!(run(&mut f, FloorEvent::UserWord(200), &cfg).is_empty());
        assert_eq!(run(&mut f, FloorEvent::UserWord(300), &cfg), vec![FloorEffect::InterruptAi]);
        assert!(run(&mut f, FloorEvent::UserWord(400), &cfg).is_empty());
        assert_eq!(f.mode, FloorMode::ParticipantSpeaking);
    }

    #[test]
    fn words_while_listening_never_interrupt() {
        let cfg = TurnTakingConfig::default();
        let mut f = FloorState::new(0);
        for t in 0..10 {
            assert!(run(&mut f, FloorEvent::UserWord(t), &cfg).is_empty());
        }
    }

    #[test]
    fn word_count_resets_per_utterance() {
        let cfg = TurnTakingConfig::default();
        let mut f = FloorState::new(0);
        run(&mut f, FloorEvent::AiSpeechStart(0), &cfg);
        run(&mut f, FloorEvent::UserWord(1), &cfg);
        run(&mut f, FloorEvent::UserWord(2), &cfg);
        run(&mut f, FloorEvent::AiSpeechEnd(3), &cfg);
        run(&mut f, FloorEvent::AiSpeechStart(4), &cfg);
        assert_eq!(f.words_during_ai_speech, 0);
        assert!(run(&mut f, FloorEvent::UserWord(5), &cfg).is_empty());
    }

    #[test]
    fn idle_then_timeout() {
        let cfg = TurnTakingConfig::default();
        let mut f = FloorState::new(0);
        run(&mut f, FloorEvent::AiSpeechStart(0), &cfg);
        run(&mut f, FloorEvent::AiSpeechEnd(1_000), &cfg);
        assert!(run(&mut f, FloorEvent::SilenceTick(6_999), &cfg).is_empty());
        assert_eq!(run(&mut f, FloorEvent::SilenceTick(7_000), &cfg), vec![FloorEffect::EmitIdlePrompt]);
        // the nudge itself is agent speech and does not reset the timeout clock
        run(&mut f, FloorEvent::AiSpeechStart(7_000), &cfg);
        run(&mut f, FloorEvent::AiSpeechEnd(8_000), &cfg);
        assert_eq!(run(&mut f, FloorEvent::SilenceTick(14_000), &cfg), vec![FloorEffect::EmitIdlePrompt]);
        run(&mut f, FloorEvent::AiSpeechStart(14_000), &cfg);
        run(&mut f, FloorEvent::AiSpeechEnd(15_000), &cfg);
        assert!(run(&mut f, FloorEvent::SilenceTick(25_000), &cfg).is_empty(), "cap reached");
        assert!(run(&mut f, FloorEvent::SilenceTick(30_999), &cfg).is_empty());
        assert_eq!(run(&mut f, FloorEvent::SilenceTick(31_000), &cfg), vec![FloorEffect::EndCallSilence]);
        assert!(run(&mut f, FloorEvent::SilenceTick(40_000), &cfg).is_empty());
    }

    #[test]
    fn out_of_order_rejected() {
        let cfg = TurnTakingConfig::default();
        let f = FloorState::new(100);
        assert_eq!(step(&f, FloorEvent::UserWord(99), &cfg).unwrap_err(), OutOfOrder { last: 100, got: 99 });
    }

    #[test]
    fn config_rules() {
        assert!(TurnTakingConfig::default().validate().is_ok());
        let bad = TurnTakingConfig { idle_delay_ms: 30_000, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = TurnTakingConfig { max_idle_messages: 0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
