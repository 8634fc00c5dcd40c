#!/usr/bin/env python3
# Copyright 2026 The AWE Embedding Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes a word<TAB>pos<TAB>lemma table for the words of a vocabulary.

Input is the `word<TAB>count` file written by `awe train --save-vocab`, or any
file with one word per line in the first column.
"""

import argparse
import sys

from lemminflect import getAllLemmas, getAllLemmasOOV

UPOS = {"noun": "NOUN", "verb": "VERB", "adj": "ADJ"}


def lemmas_for(word):
    found = getAllLemmas(word)
    if not found:
        found = getAllLemmasOOV(word, "NOUN")
    for pos, upos in UPOS.items():
        candidates = found.get(upos)
        if candidates:
            yield pos, candidates[0]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("vocab", help="vocabulary file (word in first column)")
    parser.add_argument("-o", "--out", help="output TSV (default: stdout)")
    args = parser.parse_args()

    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    with open(args.vocab, encoding="utf-8") as f:
        for line in f:
            word = line.rstrip("\n").split("\t", 1)[0]
            if not word or not word.isalpha():
                continue
            for pos, lemma in lemmas_for(word):
                out.write(f"{word}\t{pos}\t{lemma.lower()}\n")
    if out is not sys.stdout:
        out.close()


if __name__ == "__main__":
    main()
