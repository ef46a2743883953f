#!/usr/bin/env python3
"""Generate a 64x64 map of rectangular obstacle blocks on open ground.

Blocks are placed by rejection so that any two are at least `gap` cells apart.
Start and goal cells are placeholders; campaigns on these maps draw their own.
"""
import argparse
import random

SIZE = 64


def generate(seed, count, lo, hi, gap):
    rng = random.Random(seed)
    grid = [["."] * SIZE for _ in range(SIZE)]
    blocks = []
    for _ in range(100000):
        if len(blocks) == count:
            break
        h, w = rng.randint(lo, hi), rng.randint(lo, hi)
        r, c = rng.randint(2, SIZE - h - 2), rng.randint(2, SIZE - w - 2)
        if all(r + h + gap <= br or br + bh + gap <= r or c + w + gap <= bc or bc + bw + gap <= c
               for br, bc, bh, bw in blocks):
            blocks.append((r, c, h, w))
    for r, c, h, w in blocks:
        for i in range(r, r + h):
            for j in range(c, c + w):
                grid[i][j] = "#"
    grid[1][1] = "S"
    grid[SIZE - 2][SIZE - 2] = "G"
    return "\n".join("".join(row) for row in grid) + "\n"


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--min-size", type=int, default=2)
    p.add_argument("--max-size", type=int, default=4)
    p.add_argument("--gap", type=int, default=6)
    p.add_argument("out")
    a = p.parse_args()
    with open(a.out, "w") as f:
        f.write(generate(a.seed, a.count, a.min_size, a.max_size, a.gap))


if __name__ == "__main__":
    main()
