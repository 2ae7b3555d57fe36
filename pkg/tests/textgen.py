"""Segment-pair generators shared by the metric tests."""

import random

ALPHABET = "abcdeéßxyz ,.!?'\"-()0123ŋ"


def perturb(sentence: str, rng: random.Random) -> str:
    words = sentence.split()
    op = rng.randrange(5)
    if op == 0 and len(words) > 3:
        del words[rng.randrange(len(words))]
    elif op == 1 and len(words) > 3:
        i = rng.randrange(len(words) - 1)
        words[i], words[i + 1] = words[i + 1], words[i]
    elif op == 2:
        w = rng.randrange(len(words))
        words[w] = words[w][::-1]
    elif op == 3:
        words = words[: max(1, len(words) // 2)]
    else:
        words.insert(rng.randrange(len(words) + 1), rng.choice(["the", "very", "a", "quickly", ","]))
    return " ".join(words)


def random_pairs(n, seed):
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        ref = "".join(rng.choice(ALPHABET) for _ in range(rng.randint(0, 60)))
        if rng.random() < 0.5:
            hyp = "".join(rng.choice(ALPHABET) for _ in range(rng.randint(0, 60)))
        else:
            hyp = perturb(ref, rng) if ref.split() else ref
        out.append((hyp, ref))
    return out


def prose_pairs(sentences, seed=5):
    rng = random.Random(seed)
    return [(perturb(s, rng), s) for s in sentences]
