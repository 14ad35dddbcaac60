import streamlit as st

st.title("Documentation and Conclusions")
st.header("Overview Page: Documentation")

st.markdown("""
### Purpose
The Overview page recomputes every headline number from `data/paper_defaults.json` and compares it
against the published value. Red rows are outside tolerance.
""")

st.markdown("""
### Units
- Frequencies are angular (rad/s) inside the code; files and plots use Hz (Γ/2π, Ω/2π, ...).
- Pressures are Pa inside the code, mbar in files.
- Spectra are two-sided densities in **shot-noise units**: vacuum noise is exactly 1.
""")

st.markdown("### Metrics and Definitions")

st.latex(r"""
T(\Delta, \omega) = \frac{(\kappa/2)^2}{(\kappa/2)^2 + (\Delta - \omega)^2}
""")
st.caption("Cavity response at an offset ω from the tweezer laser; the resonance sits at Δ.")

st.latex(r"""
\frac{a_{AS}}{a_S} = \frac{n}{n+1}\,\frac{T(\Delta, \Omega)}{T(\Delta, -\Omega)}
""")
st.caption("Sideband asymmetry: invert for n after removing the cavity envelope.")

st.latex(r"""
n = \frac{\Gamma + A_+}{A_- - A_+}, \qquad
A_\mp = \frac{g^2 \kappa}{(\kappa/2)^2 + (\Delta \mp \Omega)^2}, \qquad
n_{\min} = \left(\frac{\kappa}{4\Omega}\right)^2
""")
st.caption("Rate equations: cooling and heating scattering rates, backaction floor.")

st.latex(r"""
A V + V A^T + D = 0, \qquad n = \tfrac{1}{2}\left(V_{qq} + V_{pp} - 1\right)
""")
st.caption("Steady state of the linear model, valid also for strong coupling.")

st.latex(r"""
\Lambda = \frac{\Gamma}{x_{zpf}^2}, \qquad
t_{\max} = \left(\frac{3m(2\bar n+1)}{2\Lambda\hbar\Omega}\right)^{1/3}, \qquad
\Gamma_{sat} = \lambda_{th}^2 \Lambda_{gas}
""")
st.caption("Free-fall decoherence: localization parameter, coherence time, saturated rate.")

st.header("Thermometry Page: Documentation")
st.markdown("""
Spectra are synthesized as shot noise plus Lorentzian sideband pairs and multiplied by
Gamma-distributed noise with variance 1/n_avg (an average of n_avg periodogram bins).
The joint fit weights every bin by S/√n_avg, refitting once with model weights.
""")

st.header("Cooling and Budget Page: Documentation")
st.markdown("""
The sweep solves the steady state of the linear model at every detuning, once at each end of the
pressure range; the shaded band is the spread between them. The dashed curve (gas heating negligible) uses
1e-8 mbar, where recoil and phase noise are left. Gas heating in the sweep is the Epstein estimate.

The budget bars use the measured gas rate when the config has one, scaled linearly with pressure.
Items are tagged **computed**, **measured** or **pass-through** (a quoted bound taken as is).
""")

st.header("Free Fall Page: Documentation")
st.markdown("""
- The wavepacket starts at x_zpf and grows as σ(t) = x_zpf (1 + Ωt) until decoherence stops it at ξ_max.
- Gas collisions are in the saturated regime: their rate is capped at Γ_sat, which fixes the pressure
  needed to reach a given size.
- Blackbody numbers are shown for comparison; below about 130 K internal temperature they would matter less.
""")

st.header("Conclusions")
st.markdown("""
- With κ/2π = 193 kHz and Ω_x/2π = 305 kHz the system is sideband resolved; the backaction floor is n ≈ 0.025.
- The predicted band at Δ/2π ≈ 315 kHz contains the measured n_x = 0.43, i.e. 70 % ground-state probability.
- Even the worst-case integration with the y mode included stays below one phonon.
- In free fall, gas collisions limit the coherence; reaching the particle size needs roughly 2×10⁻¹¹ mbar.
""")
