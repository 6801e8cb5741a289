"""Brute-force reference computations, written without the package.

Every quantity is obtained by building long words explicitly and
scanning them, so the results can be compared against the package's
recursive and cached routes.
"""

from fractions import Fraction

IMAGES = {"1": "11", "2": "212"}


def iterate(word, n, images=IMAGES):
    for _ in range(n):
        word = "".join(images[a] for a in word)
    return word


def padded(n, pad, images=IMAGES, seed="2"):
    return "1" * pad + iterate(seed, n, images) + "1" * pad


def factor_set(length, depth=12, images=IMAGES, seed="2"):
    host = padded(depth, length, images, seed)
    return {host[i:i + length] for i in range(len(host) - length + 1)}


def count(host, w):
    return sum(1 for i in range(len(host) - len(w) + 1) if host[i:i + len(w)] == w)


def measure(w, depth=12, images=IMAGES, seed="2"):
    """Occurrences of w in 1^L sigma^depth(seed) 1^L divided by 2^depth.

    For the default images 2^depth is the number of 2s in sigma^depth(2),
    so the letter 2 gets measure 1.
    """
    if set(w) <= {"1"}:
        return None
    host = padded(depth, len(w), images, seed)
    return Fraction(count(host, w), 2 ** depth)


def return_words(n, depth=10):
    host = padded(depth, 4 * n + 4)
    block = "1" * (2 * n)
    occ = [i for i in range(len(host) - 2 * n + 1) if host[i:i + 2 * n] == block]
    return sorted({host[p + n:q + n] for p, q in zip(occ, occ[1:])}, key=lambda w: (len(w), w))


def birkhoff_worst(body, K, A, c, pad=8):
    """Largest |hits_A / hits_K - c| over all intervals of anchors, by hits_K.

    ``K`` and ``A`` are (lo, set of words) pairs: anchor p is in the set when
    the letters at p + lo, p + lo + 1, ... spell one of the words. The body
    is padded by ``pad`` 1s on each side.
    """
    host = "1" * pad + body + "1" * pad

    def member(p, lo, words):
        width = len(next(iter(words)))
        start = p + lo
        return 0 <= start and start + width <= len(host) and host[start:start + width] in words

    anchors = range(len(host))
    ik = [member(p, *K) for p in anchors]
    ia = [member(p, *A) for p in anchors]
    worst = {}
    for s in anchors:
        hk = ha = 0
        for t in range(s, len(host)):
            hk += ik[t]
            ha += ia[t]
            if hk:
                d = abs(Fraction(ha, hk) - c)
                if d > worst.get(hk, -1):
                    worst[hk] = d
    return worst
