#!/usr/bin/env python3
"""Regenerates the bundled demo fixtures.

Everything here is deterministic. The golden metrics report is computed by
this script's own counting code so the C++ implementation is checked
against an independent calculation.
"""

import json
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))
FIX = os.path.join(HERE, "fixtures")
CONF = os.path.join(HERE, "configs")

PRONOUNS = ["मैं", "तुम", "वह", "हम"]
AUX = ["हूँ", "है", "हो"]
NOUNS = ["घर", "किताब", "पानी", "खाना", "स्कूल", "बाज़ार"]
VERBS = ["जाता", "आता", "पढ़ता", "खाता", "पीता", "देखता"]
ADVS = ["अब", "कल", "यहाँ", "वहाँ"]
CONTENT = {
    "घर": "home", "किताब": "book", "पानी": "water", "खाना": "food",
    "स्कूल": "school", "बाज़ार": "market", "जाता": "goes", "आता": "comes",
    "पढ़ता": "reads", "खाता": "eats", "पीता": "drinks", "देखता": "sees",
    "अब": "now", "कल": "tomorrow", "यहाँ": "here", "वहाँ": "there",
}
NES = ["राम", "सीता"]


def toy_sentence(rng):
    toks = [rng.choice(PRONOUNS)]
    if rng.random() < 0.5:
        toks.append(rng.choice(ADVS))
    toks.append(rng.choice(NOUNS))
    toks.append(rng.choice(VERBS))
    if rng.random() < 0.35:
        toks.append("और")
        toks.append(rng.choice(NOUNS))
        toks.append(rng.choice(VERBS))
    toks.append(rng.choice(AUX))
    return toks


def to_cs(tokens):
    return [CONTENT.get(t, t) for t in tokens]


def is_devanagari(tok):
    return any(0x0900 <= ord(ch) <= 0x097F for ch in tok)


def tag_of(tok):
    if tok == "<NE>":
        return "NE"
    if is_devanagari(tok):
        return "HI"
    if any(ch.isascii() and ch.isalpha() for ch in tok):
        return "EN"
    return "OTHER"


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False) + "\n")


def sentence_row(sid, tokens, source="REAL"):
    return {
        "id": sid,
        "text": " ".join(tokens),
        "tags": [tag_of(t) for t in tokens],
        "source": source,
    }


def make_mono_and_lexicon():
    rng = random.Random(2024)
    rows = []
    for i in range(36):
        rows.append(sentence_row(f"hi{i:03d}", toy_sentence(rng), "MONO"))
    # A few sentences carrying named entities for the NE-masking demo.
    for i, ne in enumerate(NES * 2):
        toks = [ne, rng.choice(ADVS), rng.choice(NOUNS),
                rng.choice(VERBS), rng.choice(AUX)]
        rows.append(sentence_row(f"hine{i:03d}", toks, "MONO"))
    write_jsonl(os.path.join(FIX, "mono_hi.jsonl"), rows)

    with open(os.path.join(FIX, "lexicon.tsv"), "w", encoding="utf-8") as f:
        for hi, en in sorted(CONTENT.items()):
            f.write(f"{hi}\t{en}\n")

    with open(os.path.join(FIX, "ne.txt"), "w", encoding="utf-8") as f:
        for ne in NES:
            f.write(ne + "\n")


def make_ref_cs():
    rng = random.Random(7)
    rows = []
    for i in range(20):
        toks = toy_sentence(rng)
        cs = [CONTENT[t] if t in CONTENT and rng.random() < 0.6 else t
              for t in toks]
        rows.append(sentence_row(f"cs{i:03d}", cs))
    write_jsonl(os.path.join(FIX, "ref_cs.jsonl"), rows)


def make_metrics_golden():
    rng = random.Random(99)
    rows = []
    for i in range(20):
        toks = []
        n = rng.randint(3, 9)
        for _ in range(n):
            kind = rng.random()
            if kind < 0.45:
                toks.append(rng.choice(NOUNS + VERBS + PRONOUNS))
            elif kind < 0.80:
                toks.append(rng.choice(list(CONTENT.values())))
            elif kind < 0.90:
                toks.append("<NE>")
            else:
                toks.append(str(rng.randint(2, 99)) + "!")
        rows.append(sentence_row(f"g{i:03d}", toks))
    write_jsonl(os.path.join(FIX, "sample20.jsonl"), rows)

    # Independent metric computation.
    tag_rows = [r["tags"] for r in rows]
    n_tokens = sum(len(t) for t in tag_rows)
    n_ne = sum(t.count("NE") for t in tag_rows)
    hi = sum(t.count("HI") for t in tag_rows)
    en = sum(t.count("EN") for t in tag_rows)
    p_hi, p_en = hi / (hi + en), en / (hi + en)
    ssq = p_hi * p_hi + p_en * p_en
    m_index = (1.0 - ssq) / ssq

    switches = pairs = 0
    for tags in tag_rows:
        seq = [t for t in tags if t in ("HI", "EN")]
        pairs += max(0, len(seq) - 1)
        switches += sum(1 for a, b in zip(seq, seq[1:]) if a != b)
    i_index = switches / pairs

    span_hist = {}
    for tags in tag_rows:
        run = 0
        for t in tags + ["HI"]:
            if t == "EN":
                run += 1
            elif run:
                span_hist[str(run)] = span_hist.get(str(run), 0) + 1
                run = 0
    len_hist = {}
    for tags in tag_rows:
        len_hist[str(len(tags))] = len_hist.get(str(len(tags)), 0) + 1

    golden = {
        "n_sentences": len(rows),
        "n_tokens": n_tokens,
        "n_ne": n_ne,
        "ne_fraction": n_ne / n_tokens,
        "m_index": m_index,
        "i_index": i_index,
        "en_span_histogram": dict(sorted(span_hist.items(), key=lambda kv: int(kv[0]))),
        "sentence_length_histogram": dict(sorted(len_hist.items(), key=lambda kv: int(kv[0]))),
    }
    with open(os.path.join(FIX, "sample20_report.golden.json"), "w") as f:
        json.dump(golden, f, indent=2, ensure_ascii=False)
        f.write("\n")


EMT = [
    # (en tokens, parse, hi tokens, pharaoh links, (clause span, translation))
    ("he said that she left",
     "(S (NP (PRP he)) (VP (VBD said) (SBAR (IN that) (S (NP (PRP she)) (VP (VBD left))))))",
     "उसने कहा कि वह चली गई",
     "0-0 1-1 2-2 3-3 4-4 4-5",
     (2, 5, "कि वह चली गई")),
    ("i know that you are happy",
     "(S (NP (PRP i)) (VP (VBP know) (SBAR (IN that) (S (NP (PRP you)) (VP (VBP are) (ADJP (JJ happy)))))))",
     "मैं जानता हूँ कि तुम खुश हो",
     "0-0 1-1 1-2 2-3 3-4 5-5 4-6",
     (2, 6, "कि तुम खुश हो")),
    ("she cried because he lied",
     "(S (NP (PRP she)) (VP (VBD cried) (SBAR (IN because) (S (NP (PRP he)) (VP (VBD lied))))))",
     "वह रोई क्योंकि उसने झूठ बोला",
     "0-0 1-1 2-2 3-3 4-4 4-5",
     (2, 5, "क्योंकि उसने झूठ बोला")),
    ("we stay home if it rains",
     "(S (NP (PRP we)) (VP (VBP stay) (NP (NN home)) (SBAR (IN if) (S (NP (PRP it)) (VP (VBZ rains))))))",
     "अगर बारिश हो तो हम घर रहते हैं",
     "0-4 1-6 2-5 3-0 4-2 5-1",
     (3, 6, "अगर बारिश हो")),
    ("they believe that the plan works",
     "(S (NP (PRP they)) (VP (VBP believe) (SBAR (IN that) (S (NP (DT the) (NN plan)) (VP (VBZ works))))))",
     "उन्हें लगता है कि योजना काम करती है",
     "0-0 1-1 1-2 2-3 4-4 5-5 5-6 5-7",
     (2, 6, "कि योजना काम करती है")),
    ("he asked why the train stopped",
     "(S (NP (PRP he)) (VP (VBD asked) (SBAR (WHADVP (WRB why)) (S (NP (DT the) (NN train)) (VP (VBD stopped))))))",
     "उसने पूछा कि रेलगाड़ी क्यों रुकी",
     "0-0 1-1 2-2 2-4 4-3 5-5",
     (2, 6, "कि रेलगाड़ी क्यों रुकी")),
    ("you can go when the work ends",
     "(S (NP (PRP you)) (VP (MD can) (VP (VB go) (SBAR (WHADVP (WRB when)) (S (NP (DT the) (NN work)) (VP (VBZ ends)))))))",
     "जब काम खत्म हो तब तुम जा सकते हो",
     "0-5 1-7 2-6 3-0 5-1 6-2 6-3",
     (3, 7, "जब काम खत्म हो")),
    ("the girl who sings won the prize",
     "(S (NP (NP (DT the) (NN girl)) (SBAR (WHNP (WP who)) (S (VP (VBZ sings))))) (VP (VBD won) (NP (DT the) (NN prize))))",
     "जो लड़की गाती है उसने इनाम जीता",
     "0-1 1-1 2-0 3-2 4-6 5-5 6-5",
     (2, 4, "जो गाती है")),
]


def make_emt_fixtures():
    en_rows, hi_rows, parses, aligns, trans = [], [], [], [], []
    for i, (en, ptb, hi, al, (lo, hi_ix, text)) in enumerate(EMT):
        en_rows.append(sentence_row(f"en{i:03d}", en.split()))
        hi_rows.append(sentence_row(f"hi{i:03d}", hi.split()))
        parses.append(ptb)
        aligns.append(al)
        trans.append({"spans": [{"lo": lo, "hi": hi_ix, "text": text}]})
    write_jsonl(os.path.join(FIX, "en.jsonl"), en_rows)
    write_jsonl(os.path.join(FIX, "hi.jsonl"), hi_rows)
    with open(os.path.join(FIX, "en.ptb"), "w") as f:
        f.write("\n".join(parses) + "\n")
    with open(os.path.join(FIX, "align.pharaoh"), "w") as f:
        f.write("\n".join(aligns) + "\n")
    write_jsonl(os.path.join(FIX, "trans.jsonl"), trans)


def make_toy_curriculum_data():
    rng = random.Random(5150)

    def parallel_rows(n, prefix):
        rows = []
        for i in range(n):
            toks = toy_sentence(rng)
            rows.append({
                "id": f"{prefix}{i:03d}",
                "src_text": " ".join(toks),
                "tgt_text": " ".join(to_cs(toks)),
            })
        return rows

    write_jsonl(os.path.join(FIX, "toy_train.jsonl"), parallel_rows(96, "tr"))
    write_jsonl(os.path.join(FIX, "toy_valid.jsonl"), parallel_rows(8, "va"))
    write_jsonl(os.path.join(FIX, "toy_test.jsonl"), parallel_rows(8, "te"))

    mono = [sentence_row(f"tm{i:03d}", toy_sentence(rng), "MONO")
            for i in range(64)]
    write_jsonl(os.path.join(FIX, "toy_mono_hi.jsonl"), mono)

    # Hindi side of the test pairs, for tcs-translate input.
    test_rows = []
    with open(os.path.join(FIX, "toy_test.jsonl"), encoding="utf-8") as f:
        for line in f:
            row = json.loads(line)
            test_rows.append(sentence_row(row["id"], row["src_text"].split(), "MONO"))
    write_jsonl(os.path.join(FIX, "toy_test_hi.jsonl"), test_rows)
    ref_rows = []
    with open(os.path.join(FIX, "toy_test.jsonl"), encoding="utf-8") as f:
        for line in f:
            row = json.loads(line)
            ref_rows.append(sentence_row(row["id"], row["tgt_text"].split()))
    write_jsonl(os.path.join(FIX, "toy_test_ref.jsonl"), ref_rows)


def make_configs():
    toy = {
        "model": {"d_model": 32, "n_heads": 2, "d_ff": 64, "max_len": 16},
        "noise": {"p_drop": 0.1, "shuffle_window": 2, "seed": 7},
        "corpora": {
            "toy_train": {"type": "parallel", "path": "demo/fixtures/toy_train.jsonl"},
            "toy_valid": {"type": "parallel", "path": "demo/fixtures/toy_valid.jsonl"},
            "toy_mono_hi": {"type": "mono", "path": "demo/fixtures/toy_mono_hi.jsonl"},
            "toy_lex": {"type": "mono", "path": "runs/demo/lex_pretrain.jsonl"},
        },
        "stages": [
            {"name": "C", "mode": "unsupervised",
             "src_mono": ["toy_mono_hi"], "tgt_mono": ["toy_lex"],
             "epochs": 3, "batch_size": 16, "lr": 0.002},
            {"name": "C2", "mode": "supervised", "init_from": "C",
             "parallel": ["toy_train"], "valid": "toy_valid",
             "epochs": 60, "batch_size": 16, "lr": 0.003},
        ],
    }
    with open(os.path.join(CONF, "toy_curriculum.json"), "w") as f:
        json.dump(toy, f, indent=2)
        f.write("\n")

    # The full curriculum family from the experiments, as a template wired
    # to user-supplied corpora. Stage chains: O; A->B; A->C->C1/C2;
    # A->D->D1/D2.
    table3 = {
        "model": {"preset": "paper", "max_len": 32},
        "noise": {"p_drop": 0.1, "shuffle_window": 3, "seed": 7},
        "corpora": {
            "iitb": {"type": "parallel", "path": "data/iitb_parallel.jsonl"},
            "opsub": {"type": "parallel", "path": "data/opsub_parallel.jsonl"},
            "allcs_train": {"type": "parallel", "path": "data/allcs_train.jsonl"},
            "allcs_valid": {"type": "parallel", "path": "data/allcs_valid.jsonl"},
            "allcs_hi": {"type": "mono", "path": "data/allcs_train_hi.jsonl"},
            "allcs_cs": {"type": "mono", "path": "data/allcs_train_cs.jsonl"},
            "opsub_hi": {"type": "mono", "path": "data/opsub_hi.jsonl"},
            "opsub_lex": {"type": "mono", "path": "data/opsub_lex.jsonl"},
            "opsub_emt": {"type": "mono", "path": "data/opsub_emt.jsonl"},
        },
        "stages": [
            {"name": "O", "mode": "supervised", "parallel": ["allcs_train"],
             "valid": "allcs_valid", "epochs": 30, "batch_size": 32, "lr": 0.0001},
            {"name": "A", "mode": "supervised", "parallel": ["iitb", "opsub"],
             "valid": "allcs_valid", "epochs": 10, "batch_size": 32, "lr": 0.0001},
            {"name": "B", "mode": "supervised", "init_from": "A",
             "parallel": ["allcs_train"], "valid": "allcs_valid",
             "epochs": 30, "batch_size": 32, "lr": 0.0001},
            {"name": "C", "mode": "unsupervised", "init_from": "A",
             "src_mono": ["opsub_hi"], "tgt_mono": ["opsub_lex"],
             "valid": "allcs_valid", "epochs": 10, "batch_size": 32, "lr": 0.0001},
            {"name": "D", "mode": "unsupervised", "init_from": "A",
             "src_mono": ["opsub_hi"], "tgt_mono": ["opsub_emt"],
             "valid": "allcs_valid", "epochs": 10, "batch_size": 32, "lr": 0.0001},
            {"name": "C1", "mode": "unsupervised", "init_from": "C",
             "src_mono": ["allcs_hi"], "tgt_mono": ["allcs_cs"],
             "valid": "allcs_valid", "epochs": 30, "batch_size": 32, "lr": 0.0001},
            {"name": "C2", "mode": "supervised", "init_from": "C",
             "parallel": ["allcs_train"], "valid": "allcs_valid",
             "epochs": 30, "batch_size": 32, "lr": 0.0001},
            {"name": "D1", "mode": "unsupervised", "init_from": "D",
             "src_mono": ["allcs_hi"], "tgt_mono": ["allcs_cs"],
             "valid": "allcs_valid", "epochs": 30, "batch_size": 32, "lr": 0.0001},
            {"name": "D2", "mode": "supervised", "init_from": "D",
             "parallel": ["allcs_train"], "valid": "allcs_valid",
             "epochs": 30, "batch_size": 32, "lr": 0.0001},
        ],
    }
    with open(os.path.join(CONF, "table3_curricula.json"), "w") as f:
        json.dump(table3, f, indent=2)
        f.write("\n")


def make_pipeline():
    pipeline = {
        "seed": 7,
        "out_dir": "runs/demo",
        "steps": [
            {"name": "lex", "op": "lex-gen",
             "args": {"corpus": "demo/fixtures/mono_hi.jsonl",
                      "lexicon": "demo/fixtures/lexicon.tsv",
                      "calibrate": "demo/fixtures/ref_cs.jsonl",
                      "variants": 2,
                      "out": "runs/demo/lex.jsonl"}},
            {"name": "lex_pretrain", "op": "lex-gen",
             "args": {"corpus": "demo/fixtures/toy_mono_hi.jsonl",
                      "lexicon": "demo/fixtures/lexicon.tsv",
                      "p": 0.5, "variants": 2,
                      "out": "runs/demo/lex_pretrain.jsonl"}},
            {"name": "emt", "op": "emt-gen",
             "args": {"corpus": "demo/fixtures/en.jsonl",
                      "parses": "demo/fixtures/en.ptb",
                      "strategy": "alignment",
                      "hi": "demo/fixtures/hi.jsonl",
                      "align": "demo/fixtures/align.pharaoh",
                      "max_switches": 1, "variants": 2,
                      "out": "runs/demo/emt.jsonl"}},
            {"name": "lex_metrics", "op": "metrics", "after": ["lex"],
             "args": {"corpus": "runs/demo/lex.jsonl",
                      "ne": "demo/fixtures/ne.txt",
                      "out": "runs/demo/lex_metrics.json",
                      "hist_csv": "runs/demo/lex_hist.csv"}},
            {"name": "emt_metrics", "op": "metrics", "after": ["emt"],
             "args": {"corpus": "runs/demo/emt.jsonl",
                      "out": "runs/demo/emt_metrics.json"}},
            {"name": "lex_diversity", "op": "diversity", "after": ["lex"],
             "args": {"corpus": "runs/demo/lex.jsonl",
                      "out": "runs/demo/lex_diversity.json"}},
            {"name": "train", "op": "tcs-train", "after": ["lex_pretrain"],
             "args": {"config": "demo/configs/toy_curriculum.json",
                      "out": "runs/demo/tcs"}},
            {"name": "translate", "op": "tcs-translate", "after": ["train"],
             "args": {"ckpt": "runs/demo/tcs/C2.ckpt",
                      "corpus": "demo/fixtures/toy_test_hi.jsonl",
                      "out": "runs/demo/tcs_test.jsonl"}},
            {"name": "bleu", "op": "bleu", "after": ["translate"],
             "args": {"cand": "runs/demo/tcs_test.jsonl",
                      "refs": ["demo/fixtures/toy_test_ref.jsonl"],
                      "out": "runs/demo/bleu.json"}},
        ],
    }
    with open(os.path.join(HERE, "pipeline.json"), "w") as f:
        json.dump(pipeline, f, indent=2)
        f.write("\n")


def main():
    os.makedirs(FIX, exist_ok=True)
    os.makedirs(CONF, exist_ok=True)
    make_mono_and_lexicon()
    make_ref_cs()
    make_metrics_golden()
    make_emt_fixtures()
    make_toy_curriculum_data()
    make_configs()
    make_pipeline()
    print("fixtures written under", HERE)


if __name__ == "__main__":
    main()
