"""Second probe round: octave-cost selection, Burg accuracy, noise voicing."""
import numpy as np
from laughsense.audio_io import AudioClip
from laughsense.dsp import autocorr_frames, frame_signal, FrameSpec, lpc_burg, lpc_roots

rng = np.random.default_rng(1)
OCTAVE_COST = 0.01

def sinc_interp(row, tau, half=30):
    lo = max(0, int(np.floor(tau)) - half)
    hi = min(row.size, int(np.ceil(tau)) + half + 1)
    k = np.arange(lo, hi)
    u = (tau - k) / half
    taper = 0.5 * (1 + np.cos(np.pi * np.clip(u, -1, 1)))
    return float(np.sum(row[k] * np.sinc(tau - k) * taper))

def pick_f0(row, rate, floor=60.0, ceil=500.0):
    lo = max(2, int(np.floor(rate / ceil)))
    hi = min(row.size - 2, int(np.ceil(rate / floor)))
    seg = row[lo:hi + 1]
    pk = np.where((seg[1:-1] > seg[:-2]) & (seg[1:-1] >= seg[2:]))[0] + 1 + lo
    if pk.size == 0:
        return None, 0.0
    best_tau, best_r, best_score = None, 0.0, -np.inf
    for p in pk:
        y0, ym, yp = row[p], row[p - 1], row[p + 1]
        den = ym - 2 * y0 + yp
        delta = 0.5 * (ym - yp) / den if den != 0 else 0.0
        delta = float(np.clip(delta, -0.5, 0.5))
        tau = p + delta
        rstar = sinc_interp(row, tau)
        score = rstar - OCTAVE_COST * np.log2(floor * tau / rate)
        if score > best_score:
            best_score, best_tau, best_r = score, tau, rstar
    return best_tau, best_r

print("=== F0 accuracy with octave cost, across rates ===")
worst = 0.0
for f0 in [100, 137, 150, 220, 287, 350, 411, 450]:
    for rate in [8000, 16000, 22050, 44100, 48000]:
        t = np.arange(int(rate * 0.7)) / rate
        x = np.sin(2 * np.pi * f0 * t + 1.1)
        clip = AudioClip("s", x, rate)
        frames = frame_signal(clip, FrameSpec(3 / 60, 0.01))
        max_lag = min(frames.shape[1] - 1, int(np.ceil(rate / 60)) + 2)
        r, silent = autocorr_frames(frames, max_lag)
        ests, voiced = [], 0
        for row in r:
            tau, rs = pick_f0(row, rate)
            if tau is not None and rs >= 0.45:
                voiced += 1
                ests.append(rate / tau)
        err = abs(np.mean(ests) - f0) / f0 * 100
        worst = max(worst, err)
        vf = voiced / r.shape[0] * 100
        tag = " <-- " if err > 1 or vf < 99 else ""
        print(f"f0={f0:4d} rate={rate:6d} est={np.mean(ests):8.3f} err={err:.4f}% voiced={vf:.1f}%{tag}")
print("worst err %:", worst)

print("\n=== white noise voicing rate ===")
for rate in [16000]:
    unv = 0; tot = 0
    for _ in range(5):
        x = rng.standard_normal(rate)
        clip = AudioClip("n", x, rate)
        frames = frame_signal(clip, FrameSpec(3 / 60, 0.01))
        max_lag = int(np.ceil(rate / 60)) + 2
        r, silent = autocorr_frames(frames, max_lag)
        for row in r:
            tau, rs = pick_f0(row, rate)
            tot += 1
            if tau is None or rs < 0.45:
                unv += 1
    print(f"unvoiced fraction: {unv/tot*100:.1f}% (want >= 90)")

print("\n=== Burg unwindowed on AR(2), 1024 samples ===")
rate = 10000
for fres, bw in [(700, 80), (700, 120), (1200, 90)]:
    r_pole = np.exp(-np.pi * bw / rate)
    th = 2 * np.pi * fres / rate
    a1, a2 = -2 * r_pole * np.cos(th), r_pole ** 2
    x = rng.standard_normal(6000)
    y = np.zeros_like(x)
    for n in range(2, len(x)):
        y[n] = x[n] - a1 * y[n - 1] - a2 * y[n - 2]
    errs = []
    for s in range(3):
        seg = y[2000 + s * 1024: 2000 + (s + 1) * 1024]
        c = lpc_burg(seg, 2)
        roots = lpc_roots(c)
        roots = roots[roots.imag > 0]
        f_est = float(np.angle(roots[0]) / (2 * np.pi) * rate)
        errs.append(f_est - fres)
    print(f"fres={fres} bw={bw}: errors {[f'{e:+.1f}' for e in errs]}")

print("\n=== CoG / peak freq sanity ===")
from laughsense.dsp import power_spectra
rate = 16000
t = np.arange(rate) / rate
x = np.sin(2 * np.pi * 1000 * t)
clip = AudioClip("c", x, rate)
frames = frame_signal(clip, FrameSpec(0.04, 0.01))
P, bin_hz = power_spectra(frames, rate)
ltas = P.mean(axis=0)
freqs = np.arange(ltas.size) * bin_hz
cog = float((freqs * ltas).sum() / ltas.sum())
print("1 kHz tone: CoG =", round(cog, 3))

cogs = []
for _ in range(100):
    x = rng.standard_normal(rate // 2)
    clip = AudioClip("w", x, rate)
    frames = frame_signal(clip, FrameSpec(0.04, 0.01))
    P, bin_hz = power_spectra(frames, rate)
    ltas = P.mean(axis=0)
    freqs = np.arange(ltas.size) * bin_hz
    cogs.append(float((freqs * ltas).sum() / ltas.sum()))
print("white noise CoG avg:", round(np.mean(cogs), 2), "(want 4000 +- 150)")

# peak freq with log-parabolic interpolation: 300 Hz tone
for ftone in [300.0, 1000.0, 433.3]:
    x = np.sin(2 * np.pi * ftone * t)
    clip = AudioClip("p", x, rate)
    frames = frame_signal(clip, FrameSpec(0.04, 0.01))
    P, bin_hz = power_spectra(frames, rate)
    ltas = P.mean(axis=0)
    pk = int(np.argmax(ltas))
    ym, y0, yp = np.log(ltas[pk - 1] + 1e-300), np.log(ltas[pk] + 1e-300), np.log(ltas[pk + 1] + 1e-300)
    den = ym - 2 * y0 + yp
    delta = 0.5 * (ym - yp) / den if den != 0 else 0.0
    print(f"peak freq for {ftone} Hz tone: {(pk + delta) * bin_hz:.3f}")
