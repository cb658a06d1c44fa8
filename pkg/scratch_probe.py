"""Scratch numeric probes for DSP design decisions (deleted before delivery)."""
import numpy as np
from laughsense.audio_io import AudioClip, peak_spl
from laughsense.dsp import autocorr_frames, frame_signal, FrameSpec, lpc_burg, lpc_roots, resample

rng = np.random.default_rng(0)

# --- 1. octave risk: corrected ACF at T vs 2T for pure sines -------------
print("=== ACF peak at T vs 2T (pure sine) ===")
for f0 in [100, 150, 220, 300, 450]:
    for rate in [8000, 16000, 44100, 48000]:
        t = np.arange(int(rate * 0.8)) / rate
        x = np.sin(2 * np.pi * f0 * t + 0.3)
        clip = AudioClip("s", x, rate)
        flen = int(round(3 / 60 * rate))
        frames = frame_signal(clip, FrameSpec(3 / 60, 0.01))
        max_lag = min(flen - 1, int(np.ceil(rate / 60)) + 2)
        r, silent = autocorr_frames(frames, max_lag)
        T = rate / f0
        mid = r.shape[0] // 2
        def val_at(lag):
            i = int(round(lag))
            if i + 1 >= r.shape[1]:
                return np.nan
            return r[mid, i]
        vT, v2T = val_at(T), val_at(2 * T)
        flag = "" if (np.isnan(v2T) or vT > v2T) else "  <-- OCTAVE RISK"
        print(f"f0={f0:4d} rate={rate:6d} r(T)={vT:.6f} r(2T)={v2T if not np.isnan(v2T) else float('nan'):.6f}{flag}")

# --- 2. HNR attainable on pure sine with sinc interpolation ---------------
print("\n=== sinc-interpolated peak r on pure sine ===")
def sinc_interp(r_row, tau, half=30):
    lo = max(0, int(np.floor(tau)) - half)
    hi = min(r_row.size, int(np.ceil(tau)) + half + 1)
    k = np.arange(lo, hi)
    u = (tau - k) / half
    taper = 0.5 * (1 + np.cos(np.pi * np.clip(u, -1, 1)))
    return float(np.sum(r_row[k] * np.sinc(tau - k) * taper))

for f0 in [120, 220, 350]:
    rate = 16000
    t = np.arange(int(rate * 1.0)) / rate
    x = np.sin(2 * np.pi * f0 * t)
    clip = AudioClip("s", x, rate)
    frames = frame_signal(clip, FrameSpec(3 / 60, 0.01))
    max_lag = int(np.ceil(rate / 60)) + 2
    r, _ = autocorr_frames(frames, max_lag)
    lo_l, hi_l = int(np.floor(rate / 500)), int(np.ceil(rate / 60))
    hnrs, f0s = [], []
    for row in r:
        seg = row[lo_l:hi_l + 1]
        # local maxima
        pk = np.where((seg[1:-1] > seg[:-2]) & (seg[1:-1] >= seg[2:]))[0] + 1 + lo_l
        if pk.size == 0:
            continue
        best = pk[np.argmax(row[pk])]
        y0, ym, yp = row[best], row[best - 1], row[best + 1]
        denom = ym - 2 * y0 + yp
        delta = 0.5 * (ym - yp) / denom if denom != 0 else 0.0
        tau = best + delta
        rstar = sinc_interp(row, tau)
        rstar = min(rstar, 1 - 1e-6)
        hnrs.append(10 * np.log10(rstar / (1 - rstar)))
        f0s.append(rate / tau)
    print(f"f0={f0}: est_f0={np.mean(f0s):.3f} (err {abs(np.mean(f0s)-f0)/f0*100:.4f}%), HNR mean={np.mean(hnrs):.2f} dB min={np.min(hnrs):.2f}")

# --- 3. HNR at 10 dB SNR ---------------------------------------------------
print("\n=== HNR of sine + noise at 10 dB SNR ===")
for trial in range(3):
    rate = 16000
    t = np.arange(rate) / rate
    sig = np.sqrt(2) * np.sin(2 * np.pi * 220 * t)  # power 1
    noise = rng.standard_normal(rate) * np.sqrt(0.1)  # power 0.1 -> 10 dB SNR
    clip = AudioClip("m", sig + noise, rate)
    frames = frame_signal(clip, FrameSpec(3 / 60, 0.01))
    max_lag = int(np.ceil(rate / 60)) + 2
    r, _ = autocorr_frames(frames, max_lag)
    lo_l, hi_l = int(np.floor(rate / 500)), int(np.ceil(rate / 60))
    hnrs = []
    for row in r:
        seg = row[lo_l:hi_l + 1]
        pk = np.where((seg[1:-1] > seg[:-2]) & (seg[1:-1] >= seg[2:]))[0] + 1 + lo_l
        if pk.size == 0:
            continue
        best = pk[np.argmax(row[pk])]
        y0, ym, yp = row[best], row[best - 1], row[best + 1]
        denom = ym - 2 * y0 + yp
        delta = 0.5 * (ym - yp) / denom if denom != 0 else 0.0
        tau = best + delta
        rstar = min(sinc_interp(row, tau), 1 - 1e-6)
        if rstar > 0:
            hnrs.append(10 * np.log10(rstar / (1 - rstar)))
    print(f"trial {trial}: HNR mean = {np.mean(hnrs):.3f} dB (target 10 +- 1.5)")

# --- 4. Burg on 2-pole resonator -------------------------------------------
print("\n=== Burg resonator recovery ===")
rate = 10000
for fres, bw in [(700, 80), (500, 100), (1200, 90)]:
    r_pole = np.exp(-np.pi * bw / rate)
    th = 2 * np.pi * fres / rate
    a_true = [1.0, -2 * r_pole * np.cos(th), r_pole**2]
    x = rng.standard_normal(5000)
    y = np.zeros_like(x)
    for n in range(len(x)):
        y[n] = x[n] - a_true[1] * y[n - 1] - a_true[2] * y[n - 2] if n >= 2 else x[n]
    c = lpc_burg(y[1000:1000 + 250] * np.hanning(250), 2)
    roots = lpc_roots(c)
    roots = roots[roots.imag > 0]
    freqs = np.angle(roots) / (2 * np.pi) * rate
    bws = -rate / np.pi * np.log(np.abs(roots))
    print(f"fres={fres}: est={freqs[0]:.1f} Hz (bw {bws[0]:.0f})")

# --- 5. white-noise prediction gain order 10 --------------------------------
errs = []
for _ in range(50):
    x = rng.standard_normal(640)
    c = lpc_burg(x, 10)
    # residual e[n] = x[n] + sum c_i x[n-1-i]
    e = x.copy()
    for i, ci in enumerate(c):
        e[i + 1:] += ci * x[: -(i + 1)]
    gain_db = 10 * np.log10(np.var(x) / np.var(e[10:]))
    errs.append(gain_db)
print(f"white-noise prediction gain: mean {np.mean(errs):.3f} dB (want ~0 +- 1)")

# --- 6. resample accuracy ---------------------------------------------------
print("\n=== resample ===")
rate = 16000
t = np.arange(rate) / rate
clip = AudioClip("r", np.sin(2 * np.pi * 1000 * t), rate)
out = resample(clip, 10000)
print("len:", out.samples.size, "expected", 10000)
spec = np.abs(np.fft.rfft(out.samples * np.hanning(out.samples.size)))
pk = np.argmax(spec)
ym, y0, yp = np.log(spec[pk - 1]), np.log(spec[pk]), np.log(spec[pk + 1])
delta = 0.5 * (ym - yp) / (ym - 2 * y0 + yp)
f_est = (pk + delta) * 10000 / out.samples.size
print(f"resampled tone freq: {f_est:.3f} Hz (err {abs(f_est-1000)/1000*100:.5f}%)")
print("amplitude:", np.max(np.abs(out.samples[1000:-1000])))

# stability of burg over random frames
bad = 0
for _ in range(1000):
    fr = rng.standard_normal(rng.integers(64, 512))
    c = lpc_burg(fr, 10)
    if c.size and np.abs(lpc_roots(c)).max() >= 1.0:
        bad += 1
print("burg unstable count /1000:", bad)
