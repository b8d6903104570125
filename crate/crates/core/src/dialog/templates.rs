use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::lang::{Family, LanguageTag};
use crate::questionnaire::QuestionKind;

/// Every fixed utterance the agent can produce, with `{slot}` placeholders:
/// `first_name`, `assistant_name`, `client_name`, `service_name`,
/// `duration`, `points` and `callback_number`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplates {
    pub greeting: String,
    pub consent_reask: String,
    pub disclosure: String,
    pub consent_ack_decline: String,
    pub clarify_yes_no: String,
    pub clarify_nps: String,
    pub clarify_likert: String,
    pub clarify_open: String,
    pub idle_message: String,
    pub encouragement: BTreeMap<u8, String>,
    pub safety_redirect: String,
    pub safety_farewell: String,
    pub silence_farewell: String,
    pub closing: String,
    pub voicemail: String,
}

impl PromptTemplates {
    pub fn for_language(tag: &LanguageTag) -> Self {
        match tag.family() {
            Family::Spanish => Self::spanish(),
            _ => Self::english(),
        }
    }

    pub fn clarification(&self, kind: &QuestionKind) -> &str {
        match kind {
            QuestionKind::YesNo => &self.clarify_yes_no,
            QuestionKind::Nps => &self.clarify_nps,
            QuestionKind::Likert { .. } => &self.clarify_likert,
            QuestionKind::OpenEnded | QuestionKind::Statement => &self.clarify_open,
        }
    }

    pub fn english() -> Self {
        Self {
            greeting: "Hi {first_name}, I'm {assistant_name}, an AI virtual researcher. I'm conducting research on behalf of {client_name} with their {service_name} customers to get to know them and get their feedback. Do you have {duration} minutes to talk to me?".into(),
            consent_reask: "Sorry, I didn't quite catch that. The survey takes about {duration} minutes and you can stop at any time. Do you have time to talk to me now?".into(),
            disclosure: "Thank you. Before we start, your answers will only be used for this study and will be shared with {client_name} without your name.".into(),
            consent_ack_decline: "Thank you for your time, have a great day.".into(),
            clarify_yes_no: "Sorry, I didn't understand your answer. Could you please answer yes or no?".into(),
            clarify_nps: "I need a number from 0 to 10 for this question. Which number would you choose?".into(),
            clarify_likert: "I need a number from 1 to {points} for this question. Which number would you choose?".into(),
            clarify_open: "Sorry, I didn't hear your answer. Could you tell me a little more?".into(),
            idle_message: "Are you still there, {first_name}?".into(),
            encouragement: BTreeMap::from([
                (25, "You're doing great, we are already a quarter of the way through.".to_string()),
                (50, "Thank you, we are halfway through the survey.".to_string()),
                (75, "Almost done, only a few questions left.".to_string()),
            ]),
            safety_redirect: "Let's keep our conversation focused on the survey.".into(),
            safety_farewell: "I'm going to end our conversation here. Thank you for your time.".into(),
            silence_farewell: "It seems I can't hear you, so I'll end the call now. Goodbye.".into(),
            closing: "That was the last question. Thank you very much for your answers, {first_name}. Goodbye.".into(),
            voicemail: "Hello {first_name}, this is {assistant_name}, an AI virtual researcher calling on behalf of {client_name} to hear about your experience with {service_name}. Please call us back at {callback_number} whenever you are available to take the survey.".into(),
        }
    }

    pub fn spanish() -> Self {
        Self {
            greeting: "Hola {first_name}, soy {assistant_name}, un investigador virtual de inteligencia artificial. Estoy realizando una investigación en nombre de {client_name} con sus clientes de {service_name} para conocerlos y obtener su opinión. ¿Tienes {duration} minutos para hablar conmigo?".into(),
            consent_reask: "Disculpa, no te entendí bien. La encuesta dura unos {duration} minutos y puedes terminarla cuando quieras. ¿Tienes tiempo para hablar conmigo ahora?".into(),
            disclosure: "Gracias. Antes de empezar, tus respuestas solo se usarán para este estudio y se compartirán con {client_name} sin tu nombre.".into(),
            consent_ack_decline: "Gracias por tu tiempo, que tengas un buen día.".into(),
            clarify_yes_no: "Disculpa, no entendí tu respuesta. ¿Podrías responder sí o no?".into(),
            clarify_nps: "Para esta pregunta necesito un número del 0 al 10. ¿Qué número elegirías?".into(),
            clarify_likert: "Para esta pregunta necesito un número del 1 al {points}. ¿Qué número elegirías?".into(),
            clarify_open: "Disculpa, no escuché tu respuesta. ¿Podrías contarme un poco más?".into(),
            idle_message: "¿Sigues ahí, {first_name}?".into(),
            encouragement: BTreeMap::from([
                (25, "Vas muy bien, ya completamos la cuarta parte.".to_string()),
                (50, "Gracias, ya vamos por la mitad de la encuesta.".to_string()),
                (75, "Ya casi terminamos, quedan pocas preguntas.".to_string()),
            ]),
            safety_redirect: "Mantengamos la conversación enfocada en la encuesta.".into(),
            safety_farewell: "Voy a terminar nuestra conversación aquí. Gracias por tu tiempo.".into(),
            silence_farewell: "Parece que no te escucho, así que terminaré la llamada. Hasta luego.".into(),
            closing: "Esa fue la última pregunta. Muchas gracias por tus respuestas, {first_name}. Hasta luego.".into(),
            voicemail: "Hola {first_name}, te habla {assistant_name}, un investigador virtual de inteligencia artificial, en nombre de {client_name} para conocer tu experiencia con {service_name}. Por favor llámanos al {callback_number} cuando tengas tiempo para responder la encuesta.".into(),
        }
    }
}

/// Slot values for [`render`].
#[derive(Debug, Clone, Default)]
pub struct Slots<'a> {
    pub first_name: &'a str,
    pub assistant_name: &'a str,
    pub client_name: &'a str,
    pub service_name: &'a str,
    pub duration: String,
    pub points: Option<u8>,
    pub callback_number: &'a str,
}

/// Replaces every known `{slot}`; unknown braces are left untouched.
pub fn render(template: &str, slots: &Slots<'_>) -> String {
    let mut out = template
        .replace("{first_name}", slots.first_name)
        .replace("{assistant_name}", slots.assistant_name)
        .replace("{client_name}", slots.client_name)
        .replace("{service_name}", slots.service_name)
        .replace("{duration}", &slots.duration)
        .replace("{callback_number}", slots.callback_number);
    if let Some(p) = slots.points {
        out = out.replace("{points}", &p.to_string());
    }
    out
}

/// Placeholders that remain in a rendered string.
pub fn unresolved_slots(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(start) = rest.find('{') {
        match rest[start..].find('}') {
            Some(end) => {
                out.push(rest[start + 1..start + end].to_owned());
                rest = &rest[start + end + 1..];
            }
            None => break,
        }
    }
    out
}

const EN_UNITS: [&str; 20] = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven",
    "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen",
];
const EN_TENS: [&str; 6] = ["", "", "twenty", "thirty", "forty", "fifty"];
const ES_UNITS: [&str; 30] = [
    "cero", "un", "dos", "tres", "cuatro", "cinco", "seis", "siete", "ocho", "nueve", "diez", "once",
    "doce", "trece", "catorce", "quince", "dieciséis", "diecisiete", "dieciocho", "diecinueve",
    "veinte", "veintiún", "veintidós", "veintitrés", "veinticuatro", "veinticinco", "veintiséis",
    "veintisiete", "veintiocho", "veintinueve",
];
const ES_TENS: [&str; 6] = ["", "", "", "treinta", "cuarenta", "cincuenta"];

/// Spoken form of a minute count below 60 ("fifteen", "quince"); digits
/// otherwise.
pub fn minutes_in_words(n: u32, family: Family) -> String {
    let n_us = n as usize;
    match family {
        Family::English if n < 20 => EN_UNITS[n_us].to_owned(),
        Family::English if n < 60 => match n % 10 {
            0 => EN_TENS[n_us / 10].to_owned(),
            u => format!("{}-{}", EN_TENS[n_us / 10], EN_UNITS[u as usize]),
        },
        Family::Spanish if n < 30 => ES_UNITS[n_us].to_owned(),
        Family::Spanish if n < 60 => match n % 10 {
            0 => ES_TENS[n_us / 10].to_owned(),
            u => format!("{} y {}", ES_TENS[n_us / 10], ES_UNITS[u as usize]),
        },
        _ => n.to_string(),
    }
}
