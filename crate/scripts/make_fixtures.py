#!/usr/bin/env python3
"""Regenerates the synthetic corpora under crates/core/tests/fixtures.

Golden outputs (recorded scorer fixture, reports, instruct hash) are produced
by the CLI afterwards; see scripts/make_goldens.sh.
"""

import json
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "crates" / "core" / "tests" / "fixtures"

ENG_ADJ = ["red", "small", "old", "quiet", "busy", "bright", "cold", "warm", "long", "new"]
IND_ADJ = ["merah", "kecil", "tua", "sepi", "sibuk", "terang", "dingin", "hangat", "panjang", "baru"]
ENG_NOUN = ["house", "market", "river", "school", "garden", "road", "boat", "village", "field", "bridge"]
IND_NOUN = ["rumah", "pasar", "sungai", "sekolah", "kebun", "jalan", "perahu", "desa", "ladang", "jembatan"]
ENG_VERB = ["is near", "is behind", "faces"]
IND_VERB = ["dekat", "di belakang", "menghadap"]
ENG_OBJ = ["the mountain", "the sea", "the city", "the forest"]
IND_OBJ = ["gunung", "laut", "kota", "hutan"]


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as f:
        for r in rows:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")


def parallel_200():
    rows = []
    for i in range(200):
        a, n = i % 10, (i // 10) % 10
        v, o = (i // 100) % 3, (i // 3) % 4
        rows.append({
            "id": f"p{i:03d}",
            "src_lang": "eng",
            "tgt_lang": "ind",
            "src_text": f"The {ENG_ADJ[a]} {ENG_NOUN[n]} {ENG_VERB[v]} {ENG_OBJ[o]}.",
            "tgt_text": f"{IND_NOUN[n].capitalize()} {IND_ADJ[a]} itu {IND_VERB[v]} {IND_OBJ[o]}.",
        })
    write_jsonl(ROOT / "parallel_200.jsonl", rows)


LABELS = ["negative", "neutral", "positive"]
NATIVE = {"ind": ["negatif", "netral", "positif"], "sun": ["negatif", "netral", "positif"]}
ENG_SENT = {
    "negative": ["the food was cold and bland", "service was slow and rude", "I regret this purchase",
                 "the room smelled bad", "a waste of money"],
    "neutral": ["the shop opens at nine", "we ordered two plates", "the parcel arrived on Monday",
                "it is a medium sized room", "the menu has four pages"],
    "positive": ["the staff were lovely", "a wonderful evening overall", "great value and tasty",
                 "I would happily return", "the view was stunning"],
}
IND_SENT = {
    "negative": ["makanannya dingin dan hambar", "pelayanannya lambat sekali", "saya menyesal membeli ini"],
    "neutral": ["toko buka jam sembilan", "kami memesan dua piring", "paketnya tiba hari senin"],
    "positive": ["stafnya ramah sekali", "malam yang menyenangkan", "enak dan murah"],
}
SUN_SENT = {
    "negative": ["kadaharanana tiis teu raos", "palayananana lami pisan", "abdi kuciwa meser ieu"],
    "neutral": ["tokona buka tabuh salapan", "urang mesen dua piring", "paketna dugi dinten senen"],
    "positive": ["stafna someah pisan", "peuting anu pikaresepeun", "raos sareng mirah"],
}


def vec(rng, center, noise):
    return [round((1.0 if d == center else 0.0) + rng.gauss(0.0, noise), 6) for d in range(8)]


def eval_fixture():
    rng = random.Random(20240501)
    out = ROOT / "eval"
    out.mkdir(parents=True, exist_ok=True)
    emb = []

    d_src = []
    for li, label in enumerate(LABELS):
        for j, text in enumerate(ENG_SENT[label] * 2):
            eid = f"src-{label[:3]}-{j}"
            d_src.append({"id": eid, "text": text if j < 5 else f"{text} again", "lang": "eng", "label": label})
            emb.append({"key": eid, "vector": vec(rng, li, 0.35)})
    write_jsonl(out / "d_src.jsonl", d_src)

    queries = []
    for lang, bank in (("ind", IND_SENT), ("sun", SUN_SENT)):
        for k in range(15):
            li = k % 3
            label = LABELS[li]
            text = bank[label][(k // 3) % 3]
            if k >= 9:
                text = f"{text} lagi"
            qid = f"q-{lang}-{k:02d}"
            queries.append({"id": qid, "text": text, "lang": lang, "label": NATIVE[lang][li]})
            emb.append({"key": qid, "vector": vec(rng, li, 0.6)})
    write_jsonl(out / "queries.jsonl", queries)

    d_para = []
    for lang, bank in (("ind", IND_SENT), ("sun", SUN_SENT)):
        for k in range(10):
            pid = f"para-{lang}-{k}"
            label = LABELS[k % 3]
            d_para.append({
                "id": pid,
                "src_lang": "eng",
                "tgt_lang": lang,
                "src_text": f"{ENG_SENT[label][k % 5]} today",
                "tgt_text": f"{bank[label][k % 3]} ayeuna" if lang == "sun" else f"{bank[label][k % 3]} hari ini",
            })
            emb.append({"key": f"{pid}#src", "vector": vec(rng, 3 + k % 5, 0.3)})
            emb.append({"key": f"{pid}#tgt", "vector": vec(rng, k % 3, 0.5)})
    write_jsonl(out / "d_para.jsonl", d_para)
    write_jsonl(out / "embeddings.jsonl", emb)

    rules = {
        "floor": -20.0,
        "rules": [{"rule": "exemplar_majority", "labels": LABELS, "hit": -1.0, "miss": -4.0}],
    }
    (out / "mock_rules.json").write_text(json.dumps(rules, indent=2) + "\n", encoding="utf-8")


def lexicon_fixture():
    pairs = [("makan", "eat"), ("minum", "drink"), ("tidur", "sleep"), ("rumah", "house"),
             ("air", "water"), ("api", "fire"), ("besar", "big"), ("kecil", "small"),
             ("baru", "new"), ("lama", "old"), ("jalan", "road"), ("laut", "sea")]
    lines = ["#src=ind\ttgt=eng"] + [f"{a}\t{b}" for a, b in pairs]
    (ROOT / "lexicon_ind_eng.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    emb = []
    for i, (a, b) in enumerate(pairs):
        one_hot = [1.0 if d == i else 0.0 for d in range(len(pairs))]
        emb.append({"key": f"ind:{a}", "vector": one_hot})
        emb.append({"key": f"eng:{b}", "vector": one_hot})
    write_jsonl(ROOT / "lexicon_identity_embeddings.jsonl", emb)


if __name__ == "__main__":
    ROOT.mkdir(parents=True, exist_ok=True)
    parallel_200()
    eval_fixture()
    lexicon_fixture()
