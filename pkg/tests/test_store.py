import pytest
from conftest import pf

from stylolink.features import FeatureCategory
from stylolink.store import (
    IntegrityError,
    NotFoundError,
    category_file,
    load_features,
    load_site,
    store_features,
    write_site,
)

C = FeatureCategory


def _profiles():
    return [
        pf("a1", "s", c1={"a": 0.1, "b": 0.9}, c10={"hello": 1 / 3, "world": 2 / 3}),
        pf("a2", "s", c1={"z": 1.0}),
    ]


def test_round_trip_is_exact(tmp_path):
    write_site(tmp_path, "s", _profiles())
    got = load_site(tmp_path, "s")
    assert list(got) == ["a1", "a2"]
    for orig in _profiles():
        assert got[orig.author_id].vectors == orig.vectors
    assert load_features(tmp_path, "a1", "s") == _profiles()[0]


def test_category_filter(tmp_path):
    write_site(tmp_path, "s", _profiles())
    got = load_features(tmp_path, "a1", "s", [C.WORDS])
    assert set(got.vectors) == {C.WORDS}
    assert set(load_site(tmp_path, "s", [C.WORDS])) == {"a1"}


def test_not_found(tmp_path):
    with pytest.raises(NotFoundError):
        load_site(tmp_path, "nosite")
    write_site(tmp_path, "s", _profiles())
    with pytest.raises(NotFoundError):
        load_features(tmp_path, "ghost", "s")
    with pytest.raises(KeyError):
        load_features(tmp_path, "ghost", "s")


def test_store_features_upserts(tmp_path):
    write_site(tmp_path, "s", _profiles())
    store_features(pf("a1", "s", c2={"ab": 1.0}), tmp_path)
    store_features(pf("a3", "s", c1={"q": 1.0}), tmp_path)
    got = load_site(tmp_path, "s")
    assert set(got["a1"].vectors) == {C.LETTER_BI}
    assert set(got) == {"a1", "a2", "a3"}


def test_site_ids_are_quoted(tmp_path):
    write_site(tmp_path, "we/ird site", [pf("x", "we/ird site", c1={"a": 1.0})])
    assert load_features(tmp_path, "x", "we/ird site").vectors[C.LETTER_UNI].weights == {"a": 1.0}


@pytest.mark.parametrize(
    "mutate,lineno",
    [
        (lambda s: s.replace("token_count=2", "token_count=3", 1), 1),
        (lambda s: s.replace("0.9", "0.8", 1), 1),
        (lambda s: s.replace("0.1", "abc", 1), 2),
        (lambda s: "stray\t0.5\n" + s, 1),
        (lambda s: s.replace("category=1", "category=2", 1), 1),
    ],
)
def test_integrity_errors_name_line(tmp_path, mutate, lineno):
    write_site(tmp_path, "s", _profiles())
    path = category_file(tmp_path, "s", C.LETTER_UNI)
    path.write_text(mutate(path.read_text()))
    with pytest.raises(IntegrityError) as err:
        load_site(tmp_path, "s")
    assert err.value.lineno == lineno
    assert f":{lineno}:" in str(err.value)


def test_rejects_tabs_in_tokens(tmp_path):
    with pytest.raises(ValueError):
        write_site(tmp_path, "s", [pf("a", "s", c10={"a\tb": 1.0})])
