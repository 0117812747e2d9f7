#!/usr/bin/env python3
"""Extract the fixture pronouncing dictionary from a full CMU dictionary.

Keeps every entry needed by the bundled samples and the test suite: words in
poem bodies of JSONL corpora, words inside string literals of C++ test
sources, and the first column of TSV word lists. Hyphenated tokens also pull
in their parts. Output uses the classic CMU layout (upper-case keys,
WORD(1) for variants) with the upstream license as a ;;; header.

    tools/build_fixture_lexicon.py --cmudict cmudict.dict --license LICENSE \
        --out data/lexicon/sample.dict data/samples/poems.jsonl tests/...
"""

import argparse
import json
import re
import sys
from collections import OrderedDict
from pathlib import Path

FOLD = {"‘": "'", "’": "'", "“": '"', "”": '"', "–": " ", "—": " "}


def normalize(raw):
    # Mirrors text::normalize_word.
    s = raw.strip()
    s = re.sub(r"^[^A-Za-z0-9]+", "", s)
    s = re.sub(r"[^A-Za-z0-9]+$", "", s)
    s = s.upper()
    if len(s) > 2 and s.endswith("'S"):
        s = s[:-2]
    return re.sub(r"-+", "-", s)


def tokens(text):
    for a, b in FOLD.items():
        text = text.replace(a, b)
    text = text.replace("--", " ")
    for raw in text.split():
        w = normalize(raw)
        if w and re.search(r"[A-Z]", w):
            yield w
            if "-" in w:
                yield from (p for p in w.split("-") if p)


def words_from(path):
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".jsonl":
        for line in text.splitlines():
            if line.strip():
                yield from tokens(json.loads(line).get("body", ""))
    elif path.suffix in (".hpp", ".cpp", ".h"):
        for lit in re.findall(r'"((?:[^"\\\n]|\\.)*)"', text):
            yield from tokens(lit.replace("\\n", "\n"))
    elif path.suffix == ".tsv":
        for line in text.splitlines():
            if line and not line.startswith("#"):
                yield from tokens(line.split("\t")[0])
    else:
        yield from tokens(text)


def load_cmudict(path):
    entries = OrderedDict()
    for line in Path(path).read_text(encoding="latin-1").splitlines():
        line = line.split("#", 1)[0].strip()
        if not line or line.startswith(";;;"):
            continue
        word, *phones = line.split()
        word = re.sub(r"\(\d+\)$", "", word).upper()
        entries.setdefault(word, []).append(" ".join(phones))
    return entries


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cmudict", required=True)
    ap.add_argument("--license", required=True)
    ap.add_argument("--out", required=True)
    ap.add_argument("inputs", nargs="+", type=Path)
    args = ap.parse_args()

    cmu = load_cmudict(args.cmudict)
    wanted = set()
    for p in args.inputs:
        files = sorted(p.rglob("*")) if p.is_dir() else [p]
        for f in files:
            if f.is_file() and f.suffix in (".jsonl", ".hpp", ".cpp", ".h", ".tsv", ".txt"):
                wanted.update(words_from(f))

    found = sorted(w for w in wanted if w in cmu)
    missing = sorted(w for w in wanted if w not in cmu and re.fullmatch(r"[A-Z][A-Z']*", w))
    with open(args.out, "w", encoding="ascii") as out:
        out.write(";;; Fixture subset of the CMU Pronouncing Dictionary (cmudict 1.1.3),\n")
        out.write(";;; generated by tools/build_fixture_lexicon.py. Upstream license:\n;;;\n")
        for line in Path(args.license).read_text().splitlines():
            out.write((";;; " + line).rstrip() + "\n")
        out.write(";;;\n")
        for w in found:
            for i, phones in enumerate(cmu[w]):
                key = w if i == 0 else f"{w}({i})"
                out.write(f"{key}  {phones}\n")
    print(f"{len(found)} words written, {len(missing)} not in the source dictionary", file=sys.stderr)
    if missing:
        print("missing: " + " ".join(missing), file=sys.stderr)


if __name__ == "__main__":
    main()
