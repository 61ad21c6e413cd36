"""Pure-numpy kernels, used when numba is disabled or unavailable.

Same call signatures and the same splitmix64 draw sequence as
``_kernels_numba``, so results agree with the compiled path (bit-identical
random streams, floating-point output equal up to summation-order rounding).
"""

import numpy as np

from ._rng import uniform_from

C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40


def _rhs(tau, y, d, hk):
    ph = d * tau
    u = np.cos(ph) - 1j * np.sin(ph)  # exp(-i d tau)
    w = u * y
    s = np.empty_like(w)
    s[:-1] = w[1:]
    s[-1] = 0.0
    s[1:] += w[:-1]
    return hk * np.conj(u) * s


def propagate_grid(d, kappa, c0, t_grid, rtol, atol, max_steps):
    """Adaptive DP5(4) integration; returns amplitudes at each grid time.

    See the numba twin for the argument and return conventions.
    """
    n = c0.shape[0]
    y = c0.astype(np.complex128).copy()
    tau = 0.0
    out = np.empty((t_grid.shape[0], n), np.complex128)
    hk = 0.5j * kappa
    k1 = _rhs(tau, y, d, hk)
    scale = atol + rtol * np.abs(y)
    d0 = np.sqrt(np.mean((np.abs(y) / scale) ** 2))
    d1 = np.sqrt(np.mean((np.abs(k1) / scale) ** 2))
    h = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    nsteps = 0
    nrej = 0
    for g, target in enumerate(t_grid):
        while tau < target:
            hu = min(h, target - tau)
            k2 = _rhs(tau + C2 * hu, y + hu * (A21 * k1), d, hk)
            k3 = _rhs(tau + C3 * hu, y + hu * (A31 * k1 + A32 * k2), d, hk)
            k4 = _rhs(tau + C4 * hu, y + hu * (A41 * k1 + A42 * k2 + A43 * k3), d, hk)
            k5 = _rhs(tau + C5 * hu, y + hu * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4), d, hk)
            k6 = _rhs(tau + hu, y + hu * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5), d, hk)
            y5 = y + hu * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
            k7 = _rhs(tau + hu, y5, d, hk)
            err = hu * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y5))
            enorm = np.sqrt(np.mean((np.abs(err) / scale) ** 2))
            nsteps += 1
            if nsteps > max_steps:
                return out, -1, nrej
            if enorm <= 1.0:
                tau += hu
                y = y5
                k1 = k7  # FSAL
                fac = 5.0 if enorm == 0.0 else min(5.0, 0.9 * enorm**-0.2)
                h = hu * fac
            else:
                nrej += 1
                h = hu * max(0.2, 0.9 * enorm**-0.2)
        ph = d * tau
        out[g] = (np.cos(ph) - 1j * np.sin(ph)) * y
    return out, nsteps, nrej


def collapse_trials(probs0, b_half, mode, t_lo, t_hi, t_list, max_atoms, eps, seeds, single_detector):
    """Run one collapse trial per seed; returns (collapsed_n, atoms_used).

    Draw order per atom matches the numba kernel: one t draw in uniform
    mode (none in fixed-list mode), then one outcome draw.
    """
    ntrials = seeds.shape[0]
    coll = np.empty(ntrials, np.int64)
    atoms = np.empty(ntrials, np.int64)
    thresh = 1.0 - eps
    for j in range(ntrials):
        state = int(seeds[j])
        post = probs0.copy()
        col = -1
        used = 0
        for k in range(max_atoms):
            if mode == 0:
                state, u1 = uniform_from(state)
                tb = t_lo + (t_hi - t_lo) * u1
            else:
                tb = t_list[k % t_list.shape[0]]
            s2 = np.sin(b_half * tb)
            s2 *= s2
            q = float(post @ s2)
            state, u2 = uniform_from(state)
            deflect = u2 < q
            used += 1
            if deflect or not single_detector:
                post = post * (s2 if deflect else 1.0 - s2)
                tot = float(post.sum())
                if tot <= 0.0:
                    break
                post /= tot
            argm = int(np.argmax(post))
            if post[argm] >= thresh:
                col = argm
                break
        coll[j] = col
        atoms[j] = used
    return coll, atoms
