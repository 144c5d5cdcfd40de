import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy import integrate

from barelay.channel import RAYLEIGH, ChannelParams, NakagamiFading, OutageProfile, RateConfig, SlotDraw, db_to_linear, outage_probs
from barelay.errors import SolverError
from barelay.mixed_rate import (
    MixedPolicy,
    gain_threshold,
    log_threshold_rule,
    mixed_condition,
    mixed_policy,
    pa_condition,
    pa_residuals,
    rate_balance,
    relay_power,
    select_link_mixed,
    select_link_mixed_delay,
    select_link_mixed_pa,
    solve_power_allocation,
    solve_rho,
    solve_water_level,
    throughput_mixed,
)

S2 = RateConfig(2.0, 2.0)


def prof_for(params):
    return outage_probs(params, S2)


def test_condition_examples():
    p = ChannelParams(1.0, 1.0, 10.0, 10.0)
    assert mixed_condition(prof_for(p), S2, 10.0)
    assert mixed_condition(OutageProfile(0.0, 0.5), S2, 1.0)
    assert not mixed_condition(OutageProfile(0.999, 0.0), S2, 1e3)


def test_solve_rho_residual_and_throughput():
    p = ChannelParams(1.0, 1.0, 10.0, 10.0)
    prof = prof_for(p)
    rho = solve_rho(prof, S2, 10.0)
    lhs, rhs = rate_balance(rho, prof, S2, 10.0)
    assert abs(lhs - rhs) < 1e-9
    assert throughput_mixed(prof, S2, 10.0) == pytest.approx(lhs, rel=1e-14)
    assert throughput_mixed(prof, S2, 10.0) == pytest.approx(1.2694753315579281, rel=1e-10)


def test_rate_balance_edges():
    prof = OutageProfile(0.3, 0.0)
    lhs, rhs = rate_balance(0.0, prof, S2, 10.0)
    assert lhs == 0.0
    lhs, rhs = rate_balance(60.0, prof, S2, 10.0)
    cap = RAYLEIGH.link(10.0).log2_tail(0.0)
    assert lhs == pytest.approx(2 * 0.7, rel=1e-12)
    assert rhs == pytest.approx(0.3 * cap, rel=1e-9)


def test_rate_balance_against_quadrature():
    prof, rho = OutageProfile(0.3, 0.0), 1.1
    t = 2 ** (rho * 2) - 1
    f = lambda r: math.exp(-r / 10) / 10
    lhs = 2 * 0.7 * integrate.quad(f, 0, t)[0]
    rhs = 0.3 * integrate.quad(lambda r: math.log2(1 + r) * f(r), 0, math.inf)[0]
    rhs += 0.7 * integrate.quad(lambda r: math.log2(1 + r) * f(r), t, math.inf)[0]
    got = rate_balance(rho, prof, S2, 10.0)
    assert got[0] == pytest.approx(lhs, rel=1e-10)
    assert got[1] == pytest.approx(rhs, rel=1e-9)


def test_case2_regime():
    prof = OutageProfile(0.95, 0.0)
    pol = mixed_policy(prof, S2, 10.0)
    assert pol.case2
    assert pol.throughput == pytest.approx(2 * 0.05)


def test_high_snr_throughput_tends_to_s0():
    # the approach is logarithmic in the SNR
    taus = []
    for g_db in (40.0, 80.0, 120.0, 200.0):
        p = ChannelParams.from_gamma_db(g_db)
        taus.append(throughput_mixed(prof_for(p), S2, p.omega_r))
    assert all(a < b < 2.0 for a, b in zip(taus, taus[1:]))
    assert taus[-1] == pytest.approx(1.9433428019459529, rel=1e-9)


@pytest.mark.parametrize(
    "g_db, fixed, pa",
    [
        (0.0, 0.7281828257, 0.7748517093),
        (10.0, 1.3635909652, 1.3646688121),
        (20.0, 1.5968718111, 1.5968806692),
        (30.0, 1.7022313019, 1.7022313688),
    ],
)
def test_frozen_throughputs(g_db, fixed, pa):
    # Omega_bar_S = 10, Omega_bar_R = 1, gamma_S = gamma_R = Gamma
    p = ChannelParams.from_gamma_db(g_db, 10.0, 1.0)
    prof = prof_for(p)
    G = db_to_linear(g_db)
    assert throughput_mixed(prof, S2, p.omega_r) == pytest.approx(fixed, rel=1e-9)
    pol = solve_power_allocation(prof, S2, G, G, 1.0)
    assert pol.throughput == pytest.approx(pa, rel=1e-9)
    assert pol.throughput >= throughput_mixed(prof, S2, p.omega_r)
    r_rate, r_power = pa_residuals(pol, prof, S2, 1.0)
    assert abs(r_rate) < 1e-8 and abs(r_power) < 1e-8 * G


@settings(max_examples=40, deadline=None)
@given(st.floats(-5.0, 35.0), st.floats(0.2, 20.0))
def test_pa_solution_consistency(g_db, omega_s):
    p = ChannelParams.from_gamma_db(g_db, omega_s, 1.0)
    prof = prof_for(p)
    G = db_to_linear(g_db)
    try:
        pol = solve_power_allocation(prof, S2, G, G, 1.0)
    except SolverError:
        assume(g_db < 0.0)
        return
    r_rate, r_power = pa_residuals(pol, prof, S2, 1.0)
    assert abs(r_rate) < 1e-8
    assert abs(r_power) < 1e-8 * max(G, 1.0)
    if not pol.case2:
        assert pol.g_limit >= pol.lam
        if pol.rho > 0:
            assert gain_threshold(pol.lam, pol.rho, G, 2.0) == pytest.approx(pol.g_limit, rel=1e-8)
    assert pol.throughput >= throughput_mixed(prof, S2, p.omega_r) - 1e-9


def test_pa_case2_and_water_level():
    prof = OutageProfile(0.99, 0.0)
    pol = solve_power_allocation(prof, S2, 1.0, 2.0, 1.0)
    assert pol.case2
    lam_t = solve_water_level(0.99, 1.0, 2.0, 1.0)
    assert pol.lam == pytest.approx(lam_t)
    assert not pa_condition(prof, S2, lam_t, 1.0)
    # classic water filling when the source never gets through
    lam = solve_water_level(1.0 - 1e-15, 1.0, 3.0, 1.0)
    from barelay.channel import RayleighLink

    assert RayleighLink(1.0).waterfill_tail(lam, lam) == pytest.approx(3.0, rel=1e-10)


def test_pa_gain_vanishes_at_high_budget():
    gaps = []
    for g_db in (30.0, 60.0):
        p = ChannelParams.from_gamma_db(g_db, 10.0, 1.0)
        G = db_to_linear(g_db)
        pa = solve_power_allocation(prof_for(p), S2, G, G, 1.0).throughput
        fixed = throughput_mixed(prof_for(p), S2, p.omega_r)
        assert fixed <= pa < 2.0
        gaps.append((pa - fixed) / fixed)
    assert gaps[1] < gaps[0] < 1e-6


def test_pa_rejects_unbalanced_budget():
    # weak budget, strong source: the threshold cannot drop below the water level
    p = ChannelParams.from_gamma_db(-3.0, 11.0, 1.0)
    G = db_to_linear(-3.0)
    with pytest.raises(SolverError):
        solve_power_allocation(prof_for(p), S2, G, G, 1.0)


def test_pa_general_fading_route():
    # the Rayleigh solution also zeroes the residuals computed by quadrature
    p = ChannelParams(10.0, 1.0, 10.0, 10.0)
    prof = prof_for(p)
    ray = solve_power_allocation(prof, S2, 10.0, 10.0, 1.0)
    r_rate, r_power = pa_residuals(ray, prof, S2, 1.0, NakagamiFading(1.0))
    assert abs(r_rate) < 1e-7 and abs(r_power) < 1e-6


def test_relay_power():
    assert relay_power(0.5, 0.5) == 0.0
    assert relay_power(1.0, 0.5) == pytest.approx(1.0)
    assert relay_power(0.1, 0.5) == 0.0


def test_slot_rules_fixed_power():
    pol = MixedPolicy(rho=1.0)
    t = 2**2 - 1
    assert select_link_mixed(pol, SlotDraw(0, 0.1, 0, 0), S2).d == 1
    assert select_link_mixed(pol, SlotDraw(5, t, 1, 1), S2).d == 1
    assert select_link_mixed(pol, SlotDraw(5, t * 0.999, 1, 1), S2).d == 0
    assert select_link_mixed(MixedPolicy(rho=0.0, case2=True), SlotDraw(5, 1e9, 1, 1), S2).d == 0
    d = select_link_mixed(pol, SlotDraw(0, 7.0, 0, 1), S2)
    assert d.relay_rate == pytest.approx(3.0)


def test_slot_rules_power_allocation():
    prof = prof_for(ChannelParams(10.0, 1.0, 10.0, 10.0))
    pol = solve_power_allocation(prof, S2, 10.0, 10.0, 1.0)
    lam, G = pol.lam, pol.g_limit
    assert select_link_mixed_pa(pol, 1, 0.5 * lam, 10.0, S2).d == 0
    assert select_link_mixed_pa(pol, 0, 0.5 * lam, 10.0, S2).d == 0
    at_g = select_link_mixed_pa(pol, 1, G, 10.0, S2)
    assert at_g.d == 1 and at_g.relay_power == pytest.approx(1 / lam - 1 / G)
    lhs = math.log(G / lam) + lam / G
    rhs = pol.rho * 2.0 - lam * 10.0 + 1.0
    assert lhs == pytest.approx(rhs, abs=1e-8)
    assert log_threshold_rule(G * 1.001, pol, S2)
    assert not log_threshold_rule(G * 0.999, pol, S2)


def test_delay_heuristic_rules():
    pol = MixedPolicy(rho=1.0)
    assert select_link_mixed_delay(0.0, 10.0, SlotDraw(5, 100.0, 0, 1), pol, S2) == 1
    assert select_link_mixed_delay(10.0, 10.0, SlotDraw(5, 100.0, 1, 1), pol, S2) == 1
    assert select_link_mixed_delay(0.0, 10.0, SlotDraw(5, 100.0, 1, 1), pol, S2) == 0
    # inside the band the threshold policy decides
    assert select_link_mixed_delay(6.0, 10.0, SlotDraw(5, 3.0, 1, 1), pol, S2) == 1
    assert select_link_mixed_delay(6.0, 10.0, SlotDraw(5, 2.0, 1, 1), pol, S2) == 0


def test_policy_validation():
    with pytest.raises(ValueError):
        MixedPolicy(rho=-1.0)
    with pytest.raises(ValueError):
        MixedPolicy(rho=1.0, lam=1.0, g_limit=0.5)


def test_fixed_power_policy_monte_carlo():
    # arrivals and departures of the threshold rule balance at the solved rho
    p = ChannelParams(1.0, 1.0, 10.0, 10.0)
    prof = prof_for(p)
    pol = mixed_policy(prof, S2, 10.0)
    rng = np.random.default_rng(2)
    n = 2_000_000
    o_s = rng.random(n) >= prof.p_s
    r = rng.exponential(10.0, n)
    d = ~o_s | (r >= pol.snr_threshold(2.0))
    arr = 2.0 * np.mean(~d & o_s)
    cap = np.mean(np.where(d, np.log2(1 + r), 0.0))
    assert arr == pytest.approx(pol.throughput, rel=5e-3)
    assert cap == pytest.approx(pol.throughput, rel=5e-3)
