import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symadit import symcat
from symadit.symcat import (
    CatalogError,
    DegenerateOrbitWarning,
    dof_info,
    orbit_expand,
    symmetrize_lattice,
    symmetrize_site,
    wyckoff_mask,
)


def test_counts(catalog):
    assert len(catalog) == 230
    assert len(catalog.positions) == 1731


def test_group_1_general_position(catalog):
    entry = catalog.group(1)
    assert len(entry.wyckoff) == 1
    w = entry.wyckoff[0]
    assert w.dof == 3
    assert w.multiplicity == 1


def test_group_225_has_4a_and_4b(catalog):
    entry = catalog.group(225)
    a = entry.position("a")
    b = entry.position("b")
    assert a.multiplicity == 4 and b.multiplicity == 4
    assert a.dof == 0 and b.dof == 0
    assert np.allclose(symmetrize_site(a, np.random.rand(3)), [0, 0, 0])
    assert np.allclose(symmetrize_site(b, np.random.rand(3)), [0.5, 0.5, 0.5])


def test_global_indices_contiguous(catalog):
    idx = [w.global_index for w in catalog.positions]
    assert idx == list(range(1731))


def test_dof_info_examples(catalog):
    # 225 a: point site, no free parameters
    dof, mask, bindings = dof_info(catalog.group(225).position("a"))
    assert dof == 0 and mask == (False, False, False) and bindings == {}
    # group 1 general position
    dof, mask, bindings = dof_info(catalog.group(1).wyckoff[0])
    assert dof == 3 and mask == (True, True, True)
    assert bindings == {"x": 0, "y": 1, "z": 2}


def test_dof_mask_tied_coordinates(catalog):
    # find a site of the form "x,x,z": rank 2, mask marks slots 0 and 2
    for entry in catalog.groups:
        for w in entry.wyckoff:
            m = w.site_form.matrix
            if (m[0][0] == 1 and m[1][0] == 1 and m[2][2] == 1
                    and m[0][2] == 0 and w.dof == 2):
                assert w.dof_mask == (True, False, True)
                _, _, bindings = dof_info(w)
                assert bindings["x"] == 0 and bindings["z"] == 2
                return
    pytest.skip("no x,x,z style site in catalog")


def test_symmetrize_site_general_is_identity_mod_1(catalog):
    w = catalog.group(1).wyckoff[0]
    f = np.array([0.31, 1.77, -0.25])
    assert np.allclose(symmetrize_site(w, f), [0.31, 0.77, 0.75])


def test_symmetrize_site_one_dof_form(catalog):
    # group 225 position e is the (x,0,0) axis family
    w = catalog.group(225).position("e")
    assert w.dof == 1
    out = symmetrize_site(w, np.array([0.3, 0.9, 0.1]))
    snapped = symmetrize_site(w, out)
    assert np.allclose(out, snapped)
    assert out[0] == pytest.approx(0.3)


def test_symmetrize_site_rejects_nonfinite(catalog):
    w = catalog.group(1).wyckoff[0]
    with pytest.raises(ValueError):
        symmetrize_site(w, np.array([np.nan, 0, 0]))


def test_symmetrize_lattice_cubic(catalog):
    lc = catalog.group(225).lattice_class
    out = symmetrize_lattice(lc, [5.65, 4.0, 3.0, 80.0, 90.0, 100.0])
    assert np.allclose(out, [5.65, 5.65, 5.65, 90, 90, 90])


def test_symmetrize_lattice_triclinic_unchanged(catalog):
    lc = catalog.group(1).lattice_class
    ell = np.array([3.0, 4.0, 5.0, 80.0, 95.0, 100.0])
    assert np.allclose(symmetrize_lattice(lc, ell), ell)


def test_symmetrize_lattice_hexagonal(catalog):
    lc = catalog.group(194).lattice_class
    out = symmetrize_lattice(lc, [3.1, 9.9, 5.0, 90.0, 90.0, 7.0])
    assert np.allclose(out, [3.1, 3.1, 5.0, 90, 90, 120])


def test_symmetrize_lattice_clamps_tiny_lengths(catalog):
    lc = catalog.group(225).lattice_class
    out = symmetrize_lattice(lc, [-2.0, 0, 0, 90, 90, 90])
    assert out[0] == pytest.approx(symcat.MIN_LENGTH)
    assert np.allclose(out[:3], out[0])


@settings(max_examples=60, deadline=None)
@given(
    gidx=st.integers(0, 229),
    widx=st.integers(0, 40),
    f=st.lists(st.floats(-2.0, 3.0, allow_nan=False), min_size=3, max_size=3),
)
def test_symmetrize_site_idempotent_property(catalog, gidx, widx, f):
    entry = catalog.groups[gidx]
    w = entry.wyckoff[widx % len(entry.wyckoff)]
    once = symmetrize_site(w, np.array(f))
    twice = symmetrize_site(w, once)
    assert np.max(np.abs(once - twice)) <= 1e-12


def test_symmetrize_idempotent_all_families(catalog):
    rng = np.random.default_rng(3)
    for g in (1, 5, 14, 62, 88, 139, 152, 166, 194, 221, 225, 230):
        lc = catalog.group(g).lattice_class
        ell = np.empty(6)
        ell[:3] = rng.uniform(2, 9, 3)
        ell[3:] = rng.uniform(60, 120, 3)
        once = symmetrize_lattice(lc, ell)
        assert np.allclose(symmetrize_lattice(lc, once), once, atol=1e-12)


def test_orbit_expand_nacl_counts(catalog):
    entry = catalog.group(225)
    a = entry.position("a")
    pts = orbit_expand(entry, a, np.zeros(3))
    assert len(pts) == 4


def test_orbit_expand_p1_single_point(catalog):
    entry = catalog.group(1)
    pts = orbit_expand(entry, entry.wyckoff[0], np.array([0.2, 0.3, 0.4]))
    assert pts.shape == (1, 3)
    assert np.allclose(pts[0], [0.2, 0.3, 0.4])


def test_orbit_expand_degenerate_warns(catalog):
    # a general-position point placed on a mirror collapses the orbit
    entry = catalog.group(225)
    general = entry.wyckoff[-1]
    with pytest.warns(DegenerateOrbitWarning):
        pts = orbit_expand(entry, general, np.zeros(3))
    assert len(pts) < general.multiplicity


def test_wyckoff_mask_partition(catalog):
    total = np.zeros(1731, dtype=int)
    for g in range(1, 231):
        mask = wyckoff_mask(catalog, g)
        total += mask.astype(int)
        for i in np.where(mask)[0]:
            assert catalog.positions[i].group_number == g
    assert total.sum() == 1731
    assert np.all(total == 1)


def test_wyckoff_mask_group1(catalog):
    assert wyckoff_mask(catalog, 1).sum() == 1


def test_dof_equals_mask_popcount_everywhere(catalog):
    # first-occurrence masks mark exactly one slot per free variable, so
    # popcount always equals the matrix rank
    for w in catalog.positions:
        assert sum(w.dof_mask) == w.dof == w.site_form.rotation_rank()


def test_known_position_anchors(catalog):
    """Well-known sites must exist with their textbook multiplicity and
    parametric form (letters may differ inside equal-multiplicity ties)."""
    from symadit.triplet import format_triplet

    anchors = [
        (62, 4, "x,1/4,z"),      # Pnma mirror site
        (136, 2, "0,0,0"),       # rutile Ti
        (136, 4, "x,x,0"),       # rutile O
        (139, 2, "0,0,1/2"),
        (166, 6, "0,0,z"),
        (186, 2, "1/3,2/3,z"),   # wurtzite
        (194, 2, "1/3,2/3,1/4"),
        (216, 4, "1/4,1/4,1/4"),  # zincblende
        (221, 1, "1/2,1/2,1/2"),
        (221, 3, "0,0,1/2"),
        (225, 8, "1/4,1/4,1/4"),
        (225, 24, "0,1/4,1/4"),
        (227, 8, "1/8,1/8,1/8"),  # diamond
        (229, 6, "0,0,1/2"),
        (230, 16, "0,0,0"),      # garnet
        (230, 24, "0,1/4,1/8"),
    ]
    for group, mult, form in anchors:
        entries = {
            (w.multiplicity, format_triplet(w.site_form))
            for w in catalog.group(group).wyckoff
        }
        assert (mult, form) in entries, (group, mult, form)


def test_site_forms_have_integer_coefficients(catalog):
    # integer coefficients guarantee the unit parameter interval charts the
    # entire torus component (symmetrizer totality)
    for w in catalog.positions:
        for row in w.site_form.matrix:
            for e in row:
                assert e.denominator == 1, w.key


def test_group_closure_sampled(catalog):
    rng = np.random.default_rng(11)
    for g in rng.choice(230, size=20, replace=False) + 1:
        entry = catalog.group(int(g))
        ops = set(entry.operations)
        oplist = list(entry.operations)
        take = rng.choice(len(oplist), size=min(8, len(oplist)), replace=False)
        for i in take:
            for j in take:
                assert oplist[i].compose(oplist[j]) in ops


def test_orbit_invariance_under_group_action(catalog):
    rng = np.random.default_rng(5)
    for g in (14, 62, 139, 166, 225):
        entry = catalog.group(g)
        w = entry.wyckoff[-1]
        f = symcat.symmetrize_site(w, rng.uniform(0.03, 0.97, 3))
        pts = orbit_expand(entry, w, f)
        op = entry.operations[int(rng.integers(len(entry.operations)))]
        mapped = np.array(
            [[float(x) % 1.0 for x in op.apply(tuple(p))] for p in pts])
        for q in mapped:
            d = np.abs(pts - q)
            d = np.minimum(d, 1 - d)
            assert np.any(np.all(d < 1e-6, axis=1))


def test_multiplicity_oracle_all_positions(catalog):
    """Brute-force orbit size equals the stored multiplicity, everywhere."""
    rng = np.random.default_rng(17)
    with warnings.catch_warnings():
        warnings.simplefilter("error", DegenerateOrbitWarning)
        for entry in catalog.groups:
            for w in entry.wyckoff:
                f = symcat.symmetrize_site(w, rng.uniform(0.02, 0.98, 3))
                pts = orbit_expand(entry, w, f)
                assert len(pts) == w.multiplicity, w.key


def test_load_failures(tmp_path, catalog):
    path = tmp_path / "bad.txt"
    path.write_text("SGCATALOG v1 groups=230 wyckoff=1731\nG 1 P1 triclinic\n")
    with pytest.raises(CatalogError):
        symcat.load_catalog(path)
    path.write_text("not a catalog\n")
    with pytest.raises(CatalogError):
        symcat.load_catalog(path)


def test_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv(symcat.ENV_CATALOG, str(tmp_path / "missing.txt"))
    symcat.default_catalog.cache_clear()
    with pytest.raises(FileNotFoundError):
        symcat.default_catalog()
    monkeypatch.delenv(symcat.ENV_CATALOG)
    symcat.default_catalog.cache_clear()
