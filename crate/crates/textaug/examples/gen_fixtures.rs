//! Regenerates the bundled fixtures:
//!
//! ```text
//! cargo run -p textaug --example gen_fixtures -- crates/textaug/fixtures
//! ```
//!
//! Output is a pure function of the seed below.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_210_901;
const ROWS: usize = 2000;
const DIM: usize = 16;

const TOPICS: [(&str, &[&str]); 3] = [
    ("eletronicos", &["celular", "fone", "notebook", "carregador", "tela", "bateria", "cabo", "teclado"]),
    ("livros", &["livro", "capítulo", "autor", "edição", "história", "página", "romance", "volume"]),
    ("casa", &["panela", "cadeira", "mesa", "toalha", "lâmpada", "sofá", "tapete", "cortina"]),
];

// (label, adjectives, verbs)
const SENTIMENTS: [(&str, &[&str], &[&str]); 3] = [
    ("positivo", &["bom", "ótimo", "excelente", "perfeito", "bonito", "rápido", "incrível", "maravilhoso"], &["gostei", "adorei", "recomendo", "amei"]),
    ("negativo", &["ruim", "péssimo", "horrível", "quebrado", "lento", "defeituoso", "fraco", "caro"], &["detestei", "odiei", "devolvi", "reclamei"]),
    ("neutro", &["normal", "comum", "regular", "razoável", "simples", "mediano", "padrão", "básico"], &["recebi", "comprei", "usei", "testei"]),
];

const FUNCTION: &[&str] = &[
    "o", "a", "de", "do", "da", "que", "e", "muito", "mas", "com", "para", "um", "uma", "chegou", "produto", "entrega", "loja",
    "veio", "foi", "é", "está", "bem", "ainda", "prazo", "no", "hoje", "esse", "achei", "bastante", "qualidade", "vendedor",
    "meu", "minha", "semana", "nada", "mais", "menos", "pouco", "sobre", "isso",
];

const TEMPLATES: &[&str] = &[
    "O {n} chegou {a}.",
    "{V} o {n}, muito {a}!",
    "A entrega foi {a} e o {n} é {a}.",
    "{V} esse {n}. Achei {a}.",
    "Produto {a}, o {n} veio no prazo.",
    "Meu {n} está {a}, mas a loja é {a2}.",
    "{V}! {n} bastante {a}.",
    "Qualidade {a}; o vendedor foi {a2}.",
    "Comprei um {n} para minha semana e achei {a}.",
    "Hoje {v} o {n}: {a}, nada mais.",
    "Isso é um {n} {a}, {v} muito.",
    "Sobre o {n}: pouco {a}, menos {a2} que o {n2}.",
];

const ENGLISH: &[(&str, &str)] = &[
    ("o", "the"), ("a", "the-f"), ("de", "of"), ("do", "of-the"), ("da", "of-the-f"), ("que", "which"), ("e", "and"),
    ("muito", "very"), ("mas", "but"), ("com", "with"), ("para", "for"), ("um", "one"), ("uma", "one-f"),
    ("chegou", "arrived"), ("produto", "product"), ("entrega", "delivery"), ("loja", "store"), ("veio", "came"),
    ("foi", "was"), ("é", "is"), ("está", "is-now"), ("bem", "well"), ("ainda", "still"), ("prazo", "deadline"),
    ("no", "in-the"), ("hoje", "today"), ("esse", "this"), ("achei", "found"), ("bastante", "quite"),
    ("qualidade", "quality"), ("vendedor", "seller"), ("meu", "my"), ("minha", "my-f"), ("semana", "week"),
    ("nada", "nothing"), ("mais", "more"), ("menos", "less"), ("pouco", "little"), ("sobre", "about"), ("isso", "that"),
    ("celular", "phone"), ("fone", "headset"), ("notebook", "laptop"), ("carregador", "charger"), ("tela", "screen"),
    ("bateria", "battery"), ("cabo", "cable"), ("teclado", "keyboard"), ("livro", "book"), ("capítulo", "chapter"),
    ("autor", "author"), ("edição", "edition"), ("história", "story"), ("página", "page"), ("romance", "novel"),
    ("volume", "tome"), ("panela", "pan"), ("cadeira", "chair"), ("mesa", "table"), ("toalha", "towel"),
    ("lâmpada", "lamp"), ("sofá", "couch"), ("tapete", "rug"), ("cortina", "curtain"), ("bom", "good"),
    ("ótimo", "great"), ("excelente", "excellent"), ("perfeito", "perfect"), ("bonito", "pretty"), ("rápido", "fast"),
    ("incrível", "incredible"), ("maravilhoso", "wonderful"), ("gostei", "liked"), ("adorei", "loved"),
    ("recomendo", "recommend"), ("amei", "adored"), ("ruim", "bad"), ("péssimo", "awful"), ("horrível", "horrible"),
    ("quebrado", "broken"), ("lento", "slow"), ("defeituoso", "faulty"), ("fraco", "weak"), ("caro", "expensive"),
    ("detestei", "hated"), ("odiei", "loathed"), ("devolvi", "returned"), ("reclamei", "complained"),
    ("normal", "normal"), ("comum", "common"), ("regular", "regular"), ("razoável", "reasonable"),
    ("simples", "simple"), ("mediano", "average"), ("padrão", "standard"), ("básico", "basic"),
    ("recebi", "received"), ("comprei", "bought"), ("usei", "used"), ("testei", "tested"),
];

const PPDB: &[(&str, &str, &str)] = &[
    ("JJ", "bom", "ótimo"), ("JJ", "ótimo", "excelente"), ("JJ", "excelente", "ótimo"), ("JJ", "perfeito", "excelente"),
    ("JJ", "incrível", "maravilhoso"), ("JJ", "maravilhoso", "incrível"), ("JJ", "ruim", "péssimo"),
    ("JJ", "péssimo", "horrível"), ("JJ", "horrível", "péssimo"), ("JJ", "lento", "fraco"), ("JJ", "defeituoso", "quebrado"),
    ("JJ", "quebrado", "defeituoso"), ("JJ", "comum", "normal"), ("JJ", "normal", "comum"), ("JJ", "regular", "mediano"),
    ("JJ", "simples", "básico"), ("JJ", "básico", "simples"), ("JJ", "padrão", "normal"), ("VB", "gostei", "adorei"),
    ("VB", "adorei", "amei"), ("VB", "amei", "adorei"), ("VB", "detestei", "odiei"), ("VB", "odiei", "detestei"),
    ("VB", "comprei", "recebi"), ("VB", "usei", "testei"), ("NN", "celular", "telefone"), ("NN", "fone", "headset"),
    ("NN", "notebook", "laptop"), ("NN", "livro", "volume"), ("NN", "volume", "livro"), ("NN", "história", "romance"),
    ("NN", "sofá", "poltrona"), ("NN", "tapete", "carpete"), ("NN", "loja", "vendedor"), ("NN", "produto", "item"),
    ("JJ", "bom", "muito bom"), ("NN", "cadeira", "cadeira de praia"), ("RB", "muito", "bastante"),
    ("RB", "bastante", "muito"), ("VB", "chegou", "veio"), ("VB", "veio", "chegou"),
];

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
}

fn sentence(rng: &mut ChaCha8Rng, topic: usize, sentiment: usize) -> String {
    let noisy = |rng: &mut ChaCha8Rng, keep: usize, p: f64| if rng.gen_bool(p) { rng.gen_range(0..3) } else { keep };
    let t = TEMPLATES.choose(rng).unwrap();
    let mut out = String::new();
    let mut rest = *t;
    while let Some(start) = rest.find('{') {
        out.push_str(&rest[..start]);
        let end = start + rest[start..].find('}').unwrap();
        let key = &rest[start + 1..end];
        let word = match key {
            "n" | "n2" => *TOPICS[noisy(rng, topic, 0.1)].1.choose(rng).unwrap(),
            "a" | "a2" => *SENTIMENTS[noisy(rng, sentiment, 0.2)].1.choose(rng).unwrap(),
            "v" | "V" => *SENTIMENTS[noisy(rng, sentiment, 0.2)].2.choose(rng).unwrap(),
            _ => unreachable!("template key {key}"),
        };
        if key == "V" || (key.starts_with('n') && (out.is_empty() || out.ends_with("! "))) {
            out.push_str(&capitalize(word));
        } else {
            out.push_str(word);
        }
        rest = &rest[end + 1..];
    }
    out.push_str(rest);
    if rng.gen_bool(0.3) {
        out.push(' ');
        out.push_str(&capitalize(FUNCTION[rng.gen_range(0..FUNCTION.len())]));
        out.push_str(" mais.");
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn vector(rng: &mut ChaCha8Rng, centroid: &[f64], spread: f64) -> Vec<f64> {
    centroid.iter().map(|c| c + rng.gen_range(-spread..spread)).collect()
}

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "crates/textaug/fixtures".into()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    let dict: BTreeMap<&str, &str> = ENGLISH.iter().copied().collect();
    let mut seen_targets = std::collections::BTreeSet::new();
    for &(_, en) in ENGLISH {
        assert!(seen_targets.insert(en), "pivot word {en} used twice");
    }

    let mut corpus = String::from("id,text,sentiment,topic\n");
    for id in 0..ROWS {
        let topic = rng.gen_range(0..3);
        let sentiment = rng.gen_range(0..3);
        let text = sentence(&mut rng, topic, sentiment);
        for w in text.split_whitespace() {
            let core: String = w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase();
            assert!(core.is_empty() || dict.contains_key(core.as_str()), "no translation for {core:?}");
        }
        writeln!(corpus, "{id},{},{},{}", csv_field(&text), SENTIMENTS[sentiment].0, TOPICS[topic].0).unwrap();
    }
    std::fs::write(dir.join("corpus.csv"), corpus).unwrap();

    let mut tsv = String::from("# pt<TAB>en, one-to-one\n");
    for &(pt, en) in ENGLISH {
        writeln!(tsv, "{pt}\t{en}").unwrap();
    }
    std::fs::write(dir.join("bt_dict.tsv"), tsv).unwrap();

    let mut ppdb = String::new();
    for &(tag, src, dst) in PPDB {
        let score: f64 = rng.gen_range(1.0..5.0);
        writeln!(ppdb, "[{tag}] ||| {src} ||| {dst} ||| PPDB2.0Score={score:.4} ||| Equivalence").unwrap();
    }
    ppdb.push_str("malformed line without separators\n");
    std::fs::write(dir.join("ppdb.txt"), ppdb).unwrap();

    // words of one semantic class share a centroid
    let mut classes: Vec<Vec<&str>> = Vec::new();
    for (_, nouns) in TOPICS {
        classes.push(nouns.to_vec());
    }
    for (_, adjs, verbs) in SENTIMENTS {
        classes.push(adjs.iter().chain(verbs.iter()).copied().collect());
    }
    classes.push(FUNCTION.to_vec());
    classes.push(vec!["telefone", "headset", "laptop", "poltrona", "carpete", "item"]);
    let mut rows: Vec<(String, Vec<f64>)> = Vec::new();
    for class in &classes {
        let centroid: Vec<f64> = (0..DIM).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for w in class {
            rows.push((w.to_string(), vector(&mut rng, &centroid, 0.35)));
        }
    }
    let mut vec_file = format!("{} {DIM}\n", rows.len());
    for (w, v) in &rows {
        vec_file.push_str(w);
        for x in v {
            write!(vec_file, " {x:.4}").unwrap();
        }
        vec_file.push('\n');
    }
    std::fs::write(dir.join("embeddings.vec"), vec_file).unwrap();
    println!("wrote fixtures to {}", dir.display());
}
