//! Regenerates the 200-sentence mock fixture under `fixtures/mock/`.
//!
//! Usage: `cargo run -p lexbias --example make_fixture -- <out-dir>`

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use lexbias::annotate::{MockRule, MockScript};
use lexbias::corpus::{build_corpus, ArticleRecord, CorpusConfig};
use lexbias::io::{csv_bytes, jsonl_bytes};
use lexbias::metrics::LabelRow;
use lexbias::prompting::PromptExample;
use lexbias::sampling::WeakScore;
use lexbias::seed::rng;
use lexbias::{BiasLabel, PoliticalLeaning};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

const ARTICLES_PER_LEANING: usize = 8;
const SENTENCES_PER_ARTICLE: usize = 5;
const MODELS: [&str; 3] = ["alpha-mock", "beta-mock", "gamma-mock"];
const INCONCLUSIVE: usize = 20;
const WRONG: usize = 27;

const SUBJECTS: &[&str] = &[
    "The city council",
    "State lawmakers",
    "The governor",
    "Federal regulators",
    "The school board",
    "Senate leaders",
    "House committee members",
    "The county commission",
    "The transit authority",
    "The health department",
];
const PEOPLE: &[&str] = &[
    "Mr. Alvarez",
    "Mrs. Chen",
    "Ms. Okafor",
    "Dr. Patel",
    "Senator Whitfield",
    "Mayor Lindqvist",
    "Governor Brandt",
    "Karen Holloway",
];
const TOPICS: &[&str] = &[
    "housing",
    "school funding",
    "water quality",
    "road repair",
    "public transit",
    "police staffing",
    "wildfire prevention",
    "broadband access",
    "hospital care",
    "tax relief",
    "farm subsidies",
    "election security",
];
const PLACES: &[&str] = &["Ohio", "Texas", "Hawaii", "Arizona", "Michigan", "Florida", "Virginia", "Chicago"];
const DAYS: &[&str] = &["Monday", "Tuesday", "Wednesday", "Thursday", "Friday"];
const MONTHS: &[&str] = &["March", "April", "June", "September", "November"];
const GROUPS: &[&str] = &["immigrants", "refugees", "Muslims", "Christians", "Black Americans", "Latinos"];

const NEUTRAL: &[&str] = &[
    "{subj} approved a budget of {n} million dollars for {topic} on {day}.",
    "{subj} said the {topic} plan would be reviewed by a committee in {month}.",
    "According to officials, {n} residents attended a meeting about {topic} in {place}.",
    "{person} told reporters that a vote on {topic} is scheduled for {day}.",
    "The annual report found that spending on {topic} rose by {n} percent in {place}.",
    "{person} has proposed a study of {topic} that would take about {n} months.",
    "A survey of {n} households in {place} asked residents about {topic}.",
    "Advocates said {group} in {place} waited {n} days on average for {topic} appointments.",
    "{subj} will hold {n} public hearings on {topic} before {month}.",
    "Officials in {place} confirmed that the {topic} program has {n} employees.",
];
const BIASED: &[&str] = &[
    "{subj} shamelessly rammed through a disastrous {topic} scheme that will ruin {place}.",
    "{person}'s reckless crusade on {topic} is an outrageous insult to hardworking families.",
    "Radical activists hijacked the debate over {topic} with absurd and hysterical demands.",
    "The so-called experts behind the {topic} fiasco have utterly betrayed voters in {place}.",
    "{subj} cynically smeared critics of the {topic} bill in a shameful display of arrogance.",
    "{person} has brazenly peddled ridiculous lies about {topic} to frightened {group}.",
    "This pathetic {topic} boondoggle is yet another corrupt giveaway from {subj}.",
    "Extremists in {place} are waging a vicious war on {topic} that threatens {group}.",
    "{subj} foolishly squandered {n} million dollars on a laughable {topic} stunt.",
    "{person} shockingly ignored the catastrophic failures of the {topic} mess in {place}.",
];

const BIASED_REPLIES: &[&str] = &[
    "The sentence relies on emotionally loaded wording. The answer is BIASED.",
    "Words such as these frame the issue in a one-sided way, so the sentence is BIASED.",
    "Loaded terms signal an opinion rather than a report. BIASED",
];
const NEUTRAL_REPLIES: &[&str] = &[
    "The sentence reports facts in neutral terms. The answer is NOT BIASED.",
    "No loaded wording is present. NOT BIASED",
    "This is a plain factual statement, so it is NOT BIASED.",
];
const INCONCLUSIVE_REPLIES: &[&str] = &[
    "I cannot decide how to classify this sentence.",
    "It could be read as BIASED or as NOT BIASED depending on context.",
];

fn fill(template: &str, r: &mut impl Rng) -> String {
    let n = r.random_range(2..90).to_string();
    template
        .replace("{subj}", SUBJECTS.choose(r).unwrap())
        .replace("{person}", PEOPLE.choose(r).unwrap())
        .replace("{topic}", TOPICS.choose(r).unwrap())
        .replace("{place}", PLACES.choose(r).unwrap())
        .replace("{day}", DAYS.choose(r).unwrap())
        .replace("{month}", MONTHS.choose(r).unwrap())
        .replace("{group}", GROUPS.choose(r).unwrap())
        .replace("{n}", &n)
}

fn unique_sentences(templates: &[&str], count: usize, seen: &mut BTreeSet<String>, r: &mut impl Rng) -> Vec<String> {
    let mut out = Vec::new();
    while out.len() < count {
        let s = fill(templates.choose(r).unwrap(), r);
        if seen.insert(s.clone()) {
            out.push(s);
        }
    }
    out
}

fn leaning_ratings(l: PoliticalLeaning) -> (&'static str, f64) {
    match l {
        PoliticalLeaning::Left => ("Left", -24.0),
        PoliticalLeaning::LeanLeft => ("Lean Left", -11.0),
        PoliticalLeaning::Center => ("Center", 0.5),
        PoliticalLeaning::LeanRight => ("Lean Right", 10.0),
        PoliticalLeaning::Right => ("Right", 23.0),
    }
}

fn pool_examples() -> Vec<PromptExample> {
    let rows: &[(&str, BiasLabel, &str)] = &[
        ("The bridge will close for repairs from May to July.", BiasLabel::NotBiased, "The sentence states a schedule without judgment."),
        ("Lawmakers passed the measure by a vote of 52 to 48.", BiasLabel::NotBiased, "It reports a vote count."),
        ("The agency published its quarterly inflation figures on Thursday.", BiasLabel::NotBiased, "It describes a routine release."),
        ("Researchers surveyed 1,200 adults about their commuting habits.", BiasLabel::NotBiased, "It describes a study neutrally."),
        ("The museum reopened after a two-year renovation.", BiasLabel::NotBiased, "It reports an event."),
        ("Prices for eggs fell by 8 percent compared with last spring.", BiasLabel::NotBiased, "It reports a measured change."),
        ("The court scheduled oral arguments for early October.", BiasLabel::NotBiased, "It states a procedural fact."),
        ("Officials said the storm damaged roughly 300 homes.", BiasLabel::NotBiased, "It attributes a figure to officials."),
        ("The union and the company agreed to resume talks next week.", BiasLabel::NotBiased, "It reports an agreement without slant."),
        ("Turnout in the primary was slightly higher than four years ago.", BiasLabel::NotBiased, "It compares figures neutrally."),
        ("The spineless senator caved to his donors yet again.", BiasLabel::Biased, "Spineless and caved are derogatory."),
        ("This insane policy is a gift to greedy landlords.", BiasLabel::Biased, "Insane and greedy express contempt."),
        ("The mayor's pathetic excuses fooled no one.", BiasLabel::Biased, "Pathetic and fooled belittle the mayor."),
        ("Fanatics have seized control of the school curriculum.", BiasLabel::Biased, "Fanatics and seized cast opponents as extreme."),
        ("The bloated agency keeps wasting taxpayer money on nonsense.", BiasLabel::Biased, "Bloated, wasting and nonsense are loaded."),
        ("Critics rightly blasted the disgraceful decision.", BiasLabel::Biased, "Rightly and disgraceful take a side."),
        ("The administration's cruel crackdown terrorized families.", BiasLabel::Biased, "Cruel and terrorized are emotive."),
        ("Out-of-touch elites sneered at ordinary workers.", BiasLabel::Biased, "Elites and sneered frame one group negatively."),
        ("The regulators finally released their long-awaited draft rules.", BiasLabel::NotBiased, "It reports a release; long-awaited is descriptive."),
        ("The governor vetoed the bill, citing its projected cost.", BiasLabel::NotBiased, "It reports an action and the stated reason."),
        ("A reckless gamble with our children's future is unacceptable.", BiasLabel::Biased, "Reckless and gamble dramatize the issue."),
        ("The candidate's bizarre rant alarmed even loyal supporters.", BiasLabel::Biased, "Bizarre and rant ridicule the candidate."),
        ("The city added 40 new buses to its fleet this year.", BiasLabel::NotBiased, "It states a count."),
        ("The shameless cover-up must end now.", BiasLabel::Biased, "Shameless and cover-up accuse without evidence."),
    ];
    rows.iter()
        .map(|(t, l, e)| PromptExample {
            text: t.to_string(),
            label: *l,
            explanation: e.to_string(),
        })
        .collect()
}

const FACTUAL: &[&str] = &[
    "What is a stereotype? An unfair, generalization about a group of people.",
    "Water boils at 100 degrees Celsius at sea level.",
    "The Pacific is the largest ocean on Earth.",
    "A leap year has 366 days.",
    "The human heart has four chambers.",
    "Light from the Sun takes about eight minutes to reach Earth.",
    "Mount Everest is the highest mountain above sea level.",
    "The Senate has 100 members.",
    "Paris is the capital of France.",
    "Photosynthesis converts light energy into chemical energy.",
];

fn reply(label: BiasLabel, r: &mut impl Rng) -> String {
    let pool = if label.is_biased() { BIASED_REPLIES } else { NEUTRAL_REPLIES };
    pool.choose(r).unwrap().to_string()
}

fn main() {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "crates/core/fixtures/mock".into()));
    fs::create_dir_all(&out).unwrap();
    let mut r = rng(20240611);

    let mut seen = BTreeSet::new();
    let mut articles = Vec::new();
    let mut gold_by_text: BTreeMap<String, BiasLabel> = BTreeMap::new();
    let per_leaning = ARTICLES_PER_LEANING * SENTENCES_PER_ARTICLE;
    for leaning in PoliticalLeaning::ALL {
        let mut items: Vec<(String, BiasLabel)> = unique_sentences(BIASED, per_leaning / 2, &mut seen, &mut r)
            .into_iter()
            .map(|s| (s, BiasLabel::Biased))
            .chain(
                unique_sentences(NEUTRAL, per_leaning / 2, &mut seen, &mut r)
                    .into_iter()
                    .map(|s| (s, BiasLabel::NotBiased)),
            )
            .collect();
        items.shuffle(&mut r);
        let (allsides, bias) = leaning_ratings(leaning);
        for (a, chunk) in items.chunks(SENTENCES_PER_ARTICLE).enumerate() {
            for (t, l) in chunk {
                gold_by_text.insert(t.clone(), *l);
            }
            let body = chunk.iter().map(|(t, _)| t.as_str()).collect::<Vec<_>>().join(" ");
            articles.push(ArticleRecord {
                article_id: format!("{}-{:02}", leaning.as_str(), a + 1),
                outlet: format!("{} Daily", allsides),
                url: format!("https://news.example/{}/{}", leaning.as_str(), a + 1),
                body,
                allsides_rating: allsides.to_string(),
                adfontes_bias: bias + r.random_range(-2.0..2.0_f64).round(),
                detected_language: None,
            });
        }
    }
    // Articles the corpus stage must drop.
    articles.push(ArticleRecord {
        article_id: "x-disagree".into(),
        outlet: "Mixed Signals".into(),
        url: "https://news.example/x/1".into(),
        body: "The council met on Monday to discuss the new budget for road repair. ".repeat(4),
        allsides_rating: "Left".into(),
        adfontes_bias: 14.0,
        detected_language: None,
    });
    articles.push(ArticleRecord {
        article_id: "x-german".into(),
        outlet: "Tagesblatt".into(),
        url: "https://news.example/x/2".into(),
        body: "Der Stadtrat hat am Montag einen neuen Haushalt beschlossen. ".repeat(5),
        allsides_rating: "Center".into(),
        adfontes_bias: 1.0,
        detected_language: Some("de".into()),
    });
    articles.push(ArticleRecord {
        article_id: "x-short".into(),
        outlet: "Brief".into(),
        url: "https://news.example/x/3".into(),
        body: "Taxes rose again this year.".into(),
        allsides_rating: "Right".into(),
        adfontes_bias: 20.0,
        detected_language: None,
    });
    articles.sort_by(|a, b| a.article_id.cmp(&b.article_id));

    let (sentences, stats) = build_corpus(&articles, &CorpusConfig::default());
    assert_eq!(sentences.len(), 200, "{stats:?}");
    let gold: Vec<LabelRow> = sentences
        .iter()
        .map(|s| LabelRow {
            sentence_id: s.sentence_id.clone(),
            label: gold_by_text[&s.text],
        })
        .collect();

    // Weak scores agree with gold except two swapped pairs per leaning,
    // which keeps every (leaning, weak label) cell at 20.
    let mut weak = Vec::new();
    for leaning in PoliticalLeaning::ALL {
        let idx: Vec<usize> = (0..sentences.len()).filter(|&i| sentences[i].leaning == leaning).collect();
        let biased: Vec<usize> = idx.iter().copied().filter(|&i| gold[i].label.is_biased()).collect();
        let neutral: Vec<usize> = idx.iter().copied().filter(|&i| !gold[i].label.is_biased()).collect();
        let flipped: BTreeSet<usize> = biased[..2].iter().chain(&neutral[..2]).copied().collect();
        for &i in &idx {
            let high = gold[i].label.is_biased() != flipped.contains(&i);
            let score: f64 = if high { r.random_range(0.55..0.95) } else { r.random_range(0.05..0.45) };
            weak.push(WeakScore {
                sentence_id: sentences[i].sentence_id.clone(),
                weak_score: (score * 1000.0).round() / 1000.0,
            });
        }
    }
    weak.sort_by(|a, b| a.sentence_id.cmp(&b.sentence_id));

    // Vote plan: 20 sentences get one inconclusive vote, 27 of the rest get a
    // wrong two-vote majority, the remaining 153 a correct majority.
    let mut order: Vec<usize> = (0..sentences.len()).collect();
    order.shuffle(&mut r);
    let mut script = MockScript::default();
    let mut retries = 0;
    for (rank, &i) in order.iter().enumerate() {
        let g = gold[i].label;
        let mut votes: [Option<BiasLabel>; 3] = [Some(g); 3];
        if rank < INCONCLUSIVE {
            votes[r.random_range(0..3)] = None;
        } else if rank < INCONCLUSIVE + WRONG {
            let keep = r.random_range(0..3);
            for (m, v) in votes.iter_mut().enumerate() {
                if m != keep {
                    *v = Some(g.inverted());
                }
            }
        } else if r.random_bool(0.3) {
            votes[r.random_range(0..3)] = Some(g.inverted());
        }
        let pattern = format!("Instruction: '{}'\\n", regex::escape(&sentences[i].text));
        for (m, v) in votes.iter().enumerate() {
            let response = match v {
                Some(l) => reply(*l, &mut r),
                None => INCONCLUSIVE_REPLIES.choose(&mut r).unwrap().to_string(),
            };
            let fail_first = if retries < 12 && r.random_bool(0.05) {
                retries += 1;
                1
            } else {
                0
            };
            script.models.entry(MODELS[m].to_string()).or_default().push(MockRule {
                pattern: pattern.clone(),
                response,
                fail_first,
                fail_status: 503,
                raw_body: None,
            });
        }
    }

    let write = |name: &str, bytes: &[u8]| fs::write(out.join(name), bytes).unwrap();
    write("articles.jsonl", &jsonl_bytes(&articles));
    write("weak_labels.jsonl", &jsonl_bytes(&weak));
    let mut gold_sorted = gold.clone();
    gold_sorted.sort_by(|a, b| a.sentence_id.cmp(&b.sentence_id));
    write("gold.csv", &csv_bytes(&gold_sorted));
    let mut script_json = serde_json::to_vec_pretty(&script).unwrap();
    script_json.push(b'\n');
    write("mock_script.json", &script_json);
    write("pool.csv", &csv_bytes(&pool_examples()));
    write("factual.txt", (FACTUAL.join("\n") + "\n").as_bytes());
    let mut ensemble = String::new();
    for m in MODELS {
        ensemble.push_str(&format!(
            "[{m}]\nbase_url = \"http://127.0.0.1:9/v1\"\nmodel_id = \"{m}\"\ntemperature = 0.0\nmax_retries = 3\nrequests_per_minute = 0\n\n"
        ));
    }
    write("ensemble.toml", (ensemble.trim_end().to_string() + "\n").as_bytes());
    write_config(&out);
    eprintln!("wrote fixture to {}", out.display());
}

fn write_config(out: &Path) {
    let cfg = r#"seed = 7

[corpus]
articles = "articles.jsonl"

[sampling]
weak_labels = "weak_labels.jsonl"
ratios = [0.7, 0.15, 0.15]
coreset_size = 20

[prompting]
pool = "pool.csv"
settings = "8-shot-exp"

[prompting.embedder]
kind = "hashing"
dim = 256
seed = 0

[annotate]
ensemble = "ensemble.toml"
mock_script = "mock_script.json"
workers = 4
record_latency = false
backoff_base_ms = 1

[baseline]
epochs = 60
min_df = 1

[eval]
gold = "gold.csv"

[checklist]
factual = "factual.txt"
"#;
    fs::write(out.join("pipeline.toml"), cfg).unwrap();
}
