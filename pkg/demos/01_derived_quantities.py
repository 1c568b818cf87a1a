"""Derived quantities for the default trap.

The spin-motion coupling here comes from a static magnetic-field gradient,
not photon recoil: a spin flip displaces the equilibrium position, so the
effective Lamb-Dicke parameter is eta = z0 mu_B dB/dz / (hbar omega_z) with
z0 the ground-state extent.  Everything below follows from the config values.
"""

from sbcool import (
    ExperimentConfig,
    doppler_limit,
    ground_state_extent,
    lamb_dicke_eff,
    noise_density,
    sideband_rabi,
)

cfg = ExperimentConfig()
trap = cfg.trap()

z0 = ground_state_extent(trap)
eta = lamb_dicke_eff(trap)
print(f"ground-state extent z0      = {z0:.4e} m")
print(f"effective Lamb-Dicke eta    = {eta:.6f}")

# Sideband Rabi frequencies scale as sqrt(n) (red) / sqrt(n+1) (blue).
f_carrier = cfg.carrier_rabi_hz
print(f"carrier Rabi                = {f_carrier / 1e3:.1f} kHz")
for n in (1, 2, 10):
    f_red = sideband_rabi(n, "red", eta, f_carrier)
    print(f"red sideband Rabi at n={n:<3} = {f_red:8.2f} Hz")

# The Doppler stage bottoms out at Gamma/(2 omega_z) - 1/2 for a linewidth
# much larger than the trap frequency; that's where pulsed cooling takes over.
nbar_d = doppler_limit(cfg.doppler_linewidth_hz, cfg.nu_z_hz)
print(f"Doppler cooling limit       = {nbar_d:.2f} quanta")

# A measured heating rate converts to an electric-field noise density at the
# trap frequency; useful for comparing traps of different size and frequency.
for ndot in (41.0, 6700.0):
    s_e = noise_density(ndot, cfg.nu_z_hz, cfg.mass_amu)
    print(f"S_E at ndot = {ndot:6.0f}/s     = {s_e:.3e} V^2 m^-2 Hz^-1")
