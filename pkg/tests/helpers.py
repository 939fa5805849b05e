import numpy as np

from wishartqbq import RngSeed, WishartParams, random_spd, random_symmetric

ACCEPTANCE_LINES = []


def rel_frob(a, b):
    return np.linalg.norm(np.asarray(a) - np.asarray(b)) / np.linalg.norm(b)


def random_instance(seed, n, k):
    g = RngSeed(seed, 7).generator()
    params = WishartParams(random_spd(n, g), k)
    return params, random_symmetric(n, g)
