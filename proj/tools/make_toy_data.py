#!/usr/bin/env python3
"""Regenerates the bundled toy datasets under data/.

Everything is seeded, so reruns reproduce the committed files byte for byte.
"""

import math
import random
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent
DATA = ROOT / "data"


def make_mds_table() -> None:
    """35 items x 10 features with a strong planar structure.

    Latent 2-D positions are lifted into 10 dimensions by a fixed rotation
    and perturbed slightly, so a 2-D embedding can push the stress very low.
    """
    rng = random.Random(20240311)
    n, latent_dim, dim = 35, 2, 10

    points = []
    for i in range(n):
        angle = 2 * math.pi * i / n
        radius = 2.0 + 1.4 * math.sin(3 * angle) + 0.25 * rng.gauss(0, 1)
        points.append((radius * math.cos(angle), radius * math.sin(angle)))

    # Fixed orthonormal 10x2 lift (Gram-Schmidt on seeded Gaussians).
    cols = []
    for _ in range(latent_dim):
        v = [rng.gauss(0, 1) for _ in range(dim)]
        for c in cols:
            dot = sum(a * b for a, b in zip(v, c))
            v = [a - dot * b for a, b in zip(v, c)]
        norm = math.sqrt(sum(a * a for a in v))
        cols.append([a / norm for a in v])

    lines = []
    for z in points:
        row = [z[0] * cols[0][j] + z[1] * cols[1][j] + 0.02 * rng.gauss(0, 1)
               for j in range(dim)]
        lines.append(" ".join(f"{v:.6f}" for v in row))
    (DATA / "mds_table.txt").write_text("\n".join(lines) + "\n")


TOPICS = {
    "music": ["piano", "violin", "concert", "melody", "rhythm", "chord",
              "orchestra", "singer", "guitar", "tempo", "opera", "drum",
              "harmony", "tune", "composer", "flute", "choir", "sonata"],
    "ocean": ["wave", "coral", "tide", "whale", "shark", "sailor", "harbor",
              "island", "reef", "current", "dolphin", "seaweed", "anchor",
              "lagoon", "storm", "salt", "fisher", "shell"],
    "forest": ["oak", "pine", "moss", "fern", "deer", "owl", "trail",
               "canopy", "root", "bark", "fox", "mushroom", "meadow",
               "badger", "leaf", "acorn", "grove", "bramble"],
    "city": ["street", "subway", "tower", "market", "bridge", "museum",
             "traffic", "plaza", "cafe", "lamp", "avenue", "tram",
             "station", "vendor", "skyline", "alley", "park", "crowd"],
    "cooking": ["onion", "garlic", "butter", "flour", "oven", "simmer",
                "spice", "dough", "skillet", "pepper", "basil", "roast",
                "broth", "yeast", "knife", "sauce", "flame", "sugar"],
    "space": ["orbit", "comet", "nebula", "rocket", "lunar", "galaxy",
              "probe", "crater", "stellar", "cosmos", "asteroid", "module",
              "telescope", "gravity", "dust", "solar", "vacuum", "launch"],
    "sport": ["goal", "sprint", "coach", "stadium", "racket", "whistle",
              "league", "medal", "defense", "striker", "marathon", "pitch",
              "umpire", "score", "training", "tackle", "paddle", "jersey"],
    "weather": ["cloud", "frost", "thunder", "breeze", "drizzle", "hail",
                "fog", "sunshine", "blizzard", "humidity", "gust", "rainbow",
                "monsoon", "chill", "heatwave", "dew", "mist", "lightning"],
}

FUNCTION_WORDS = ["the", "a", "of", "and", "to", "in", "is", "with", "on",
                  "for", "that", "as", "by", "at", "from", "it", "near",
                  "over", "under", "its"]


def zipf_choice(rng: random.Random, words: list) -> str:
    weights = [1.0 / (r + 1) ** 0.9 for r in range(len(words))]
    return rng.choices(words, weights=weights, k=1)[0]


def make_corpus(target_tokens: int = 100_000) -> None:
    rng = random.Random(987654)
    topics = list(TOPICS.keys())
    lines, tokens = [], 0
    while tokens < target_tokens:
        topic = TOPICS[rng.choice(topics)]
        length = rng.randint(8, 16)
        words = []
        for _ in range(length):
            if rng.random() < 0.35:
                words.append(zipf_choice(rng, FUNCTION_WORDS))
            else:
                words.append(zipf_choice(rng, topic))
        lines.append(" ".join(words))
        tokens += length
    (DATA / "corpus_small.txt").write_text("\n".join(lines) + "\n")


def make_similarity() -> None:
    rows = [
        ("piano", "violin", 9.0), ("piano", "guitar", 8.4),
        ("melody", "rhythm", 8.8), ("singer", "choir", 8.2),
        ("wave", "tide", 9.1), ("whale", "dolphin", 8.9),
        ("coral", "reef", 9.3), ("oak", "pine", 8.7),
        ("deer", "fox", 7.6), ("street", "avenue", 8.9),
        ("subway", "tram", 8.1), ("onion", "garlic", 8.6),
        ("oven", "skillet", 7.2), ("orbit", "comet", 7.8),
        ("rocket", "launch", 8.3), ("piano", "shark", 1.1),
        ("garlic", "stadium", 0.8), ("nebula", "butter", 0.7),
        ("frost", "thunder", 5.9), ("goal", "medal", 6.4),
    ]
    lines = ["# word1\tword2\thuman_score"]
    lines += [f"{a}\t{b}\t{s}" for a, b, s in rows]
    (DATA / "similarity_toy.tsv").write_text("\n".join(lines) + "\n")


def make_edges() -> None:
    edges = [
        ("dog", "canine"), ("wolf", "canine"), ("canine", "mammal"),
        ("cat", "feline"), ("lion", "feline"), ("feline", "mammal"),
        ("mammal", "animal"), ("sparrow", "bird"), ("eagle", "bird"),
        ("bird", "animal"), ("salmon", "fish"), ("shark", "fish"),
        ("fish", "animal"), ("animal", "organism"), ("oak", "tree"),
        ("pine", "tree"), ("tree", "plant"), ("plant", "organism"),
    ]
    lines = ["# child\thypernym"]
    lines += [f"{a}\t{b}" for a, b in edges]
    (DATA / "edges_toy.tsv").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    DATA.mkdir(exist_ok=True)
    make_mds_table()
    make_corpus()
    make_similarity()
    make_edges()
    print("wrote", ", ".join(p.name for p in sorted(DATA.iterdir())))
