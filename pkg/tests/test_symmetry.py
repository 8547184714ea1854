import time

import numpy as np
import pytest

from charwave.groups import builtin_generators, get_group, groups_for
from charwave.jets import VectorField
from charwave.symbolic import Expr
from charwave.symmetry import (Ansatz, FlowError, SymmetryBasis, contains_span, criterion_residual,
                               determining_system, find_symmetries, flow, product_filter, same_span,
                               span_rank, verify_generator)
from charwave.linalg import rank
from charwave.systems import builtin_system, system_from_dict

U = Expr.symbol("u")
SYSTEM1 = builtin_system("system1")
GAS = builtin_system("gas-reduced")
GAS_FULL = builtin_system("gas-full")


def fields(system, text_list):
    return [VectorField.parse(t, system.alphabet) for t in text_list]


W_SYSTEM1 = ["x*Dx + t*Dt", "Dt", "t*Dx + Du + u*Dv", "Dx", "Dv"]


def test_system1_algebra_is_five_dimensional():
    start = time.perf_counter()
    basis = find_symmetries(SYSTEM1, 1, 1)
    assert time.perf_counter() - start < 10
    assert len(basis) == 5
    assert same_span(basis.fields, fields(SYSTEM1, W_SYSTEM1))


def test_system1_constant_ansatz_gives_translations():
    basis = find_symmetries(SYSTEM1, 0, 0)
    assert same_span(basis.fields, fields(SYSTEM1, ["Dx", "Dt", "Dv"]))


def test_criterion_residual_examples():
    assert all(r.is_zero() for r in criterion_residual(SYSTEM1, fields(SYSTEM1, ["x*Dx + t*Dt"])[0]))
    zero = VectorField.from_components(SYSTEM1.alphabet, {})
    assert all(r.is_zero() for r in criterion_residual(SYSTEM1, zero))
    assert any(not r.is_zero() for r in criterion_residual(SYSTEM1, fields(SYSTEM1, ["Du"])[0]))
    assert not verify_generator(SYSTEM1, fields(SYSTEM1, ["Du"])[0])


def test_determining_rows_contain_known_equations():
    # phi_t - psi_x + 2 u phi_x = 0 must hold for every solution: check it on the basis
    linsys = determining_system(SYSTEM1, Ansatz(1, 1))
    assert linsys.shape[1] == 2 * 3 + 2 * 3 * 3
    for f in find_symmetries(SYSTEM1, 1, 1):
        phi, psi = f.phi
        xi, tau = f.xi
        lhs = phi.diff("t") - psi.diff("x") + 2 * phi.diff("x") * U
        assert lhs.is_zero()
        lhs2 = (phi.diff("u") - psi.diff("v") + xi.diff("x") - tau.diff("t")
                + U * (2 * phi.diff("v") - 2 * tau.diff("x")))
        assert lhs2.is_zero()


@pytest.mark.parametrize("name", [f"w{k}" for k in range(1, 6)])
def test_system1_generators_verify(name):
    v = builtin_generators("system1")[name]
    assert verify_generator(SYSTEM1, VectorField.parse(v.to_string(), SYSTEM1.alphabet))


@pytest.mark.parametrize("name", [f"w{k}" for k in range(1, 9)] + ["wbeta", "uDu", "uvDu"])
def test_gas_generators_verify_on_both_forms(name):
    v = builtin_generators("gas")[name]
    for system in (GAS, GAS_FULL):
        assert verify_generator(system, VectorField.parse(v.to_string(), system.alphabet))


@pytest.fixture(scope="module")
def gas_basis():
    return find_symmetries(GAS, 2, 2)


def test_gas_basis_contains_listed_generators(gas_basis):
    listed = [VectorField.parse(v.to_string(), GAS.alphabet) for v in builtin_generators("gas").values()]
    assert len(gas_basis) >= 10
    assert contains_span(gas_basis.fields, listed)
    assert all(verify_generator(GAS, f) for f in gas_basis)


def test_product_filter_on_gas_basis(gas_basis):
    kept = product_filter(gas_basis, GAS)
    # exactly the subspace with phi(u=0) = 0
    for f in kept:
        assert f.phi[0].subs({"u": 0}).is_zero()
    # dimension = dim(basis) - rank of the map f -> phi(u=0)
    restricted = [f.phi[0].subs({"u": 0}) for f in gas_basis]
    monomials = sorted({m for r in restricted for m in r.terms}, key=str)
    image_rank = rank([[r.coefficient(m) for r in restricted] for m in monomials]) if monomials else 0
    assert span_rank(kept.fields) == len(kept) == len(gas_basis) - image_rank
    listed = [VectorField.parse(v.to_string(), GAS.alphabet) for v in builtin_generators("gas").values()]
    assert contains_span(kept.fields, listed)
    for f in kept:
        assert verify_generator(GAS_FULL, VectorField.parse(f.to_string(), GAS_FULL.alphabet))


def test_product_filter_trivial_cases():
    basis = SymmetryBasis(fields(GAS, ["Du", "(u^2 + u)*Du", "Dx"]))
    kept = product_filter(basis, GAS)
    assert same_span(kept.fields, fields(GAS, ["(u^2 + u)*Du", "Dx"]))


def test_translation_invariance_of_scalar_equation():
    sys = system_from_dict({"name": "ut", "independent": ["x", "t"], "dependent": ["u"],
                            "equations": ["u_t"], "solved": {"u_t": "0"}})
    basis = find_symmetries(sys, 0, 0)
    assert contains_span(basis.fields, fields(sys, ["Dx", "Dt", "Du"]))


# flows --------------------------------------------------------------------

def test_flow_identity_and_scaling():
    w1 = fields(SYSTEM1, ["x*Dx + t*Dt"])[0]
    z = np.array([0.3, 1.2, -0.5, 2.0])
    assert np.array_equal(flow(w1, z, 0.0), z)
    assert np.allclose(flow(w1, z, 0.4), [np.exp(0.4) * 0.3, np.exp(0.4) * 1.2, -0.5, 2.0], atol=1e-8)


def test_flow_gas_w8_example():
    w8 = VectorField.parse(builtin_generators("gas")["w8"].to_string(), GAS.alphabet)
    assert np.allclose(flow(w8, [1, 1, 1, 1], 0.5), [2, 2, 0.5, 1], atol=1e-8)


def test_flow_blowup_raises():
    w8 = VectorField.parse(builtin_generators("gas")["w8"].to_string(), GAS.alphabet)
    with pytest.raises(FlowError):
        flow(w8, [1, 1, 1, 1], 1.5)


@pytest.mark.parametrize("family", ["system1", "gas"])
def test_flows_match_closed_form_actions(family):
    rng = np.random.default_rng(7)
    for name, g in groups_for(family).items():
        if g.generator is None:
            continue
        for _ in range(20):
            x, t = rng.uniform(-1, 1, size=2)
            u, v = rng.uniform(0.2, 1.0, size=2)
            eta = rng.uniform(0 if g.semigroup else -0.5, 0.5)
            if not g.valid(x, t, u, v, eta):
                continue
            expected = np.array(g.act(x, t, u, v, eta), dtype=float)
            got = flow(g.generator, [x, t, u, v], eta)
            assert np.max(np.abs(got - expected)) < 1e-8, (name, x, t, u, v, eta)


@pytest.mark.parametrize("family", ["system1", "gas"])
def test_flow_group_law(family):
    rng = np.random.default_rng(11)
    for g in groups_for(family).values():
        if g.generator is None:
            continue
        for _ in range(5):
            z = np.concatenate([rng.uniform(-0.5, 0.5, size=2), rng.uniform(0.2, 1.0, size=2)])
            e1, e2 = rng.uniform(0 if g.semigroup else -0.5, 0.5, size=2) / 2
            two = flow(g.generator, flow(g.generator, z, e1), e2)
            one = flow(g.generator, z, e1 + e2)
            assert np.max(np.abs(two - one)) < 1e-7
