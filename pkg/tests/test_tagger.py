import pytest

from stylolink.tagger import (
    TAGSET,
    Channel,
    TagFormatError,
    TaggedPost,
    baseline_tag,
    ingest_external_tags,
    tag_text,
    tokenize,
    write_external_tags,
)


@pytest.mark.parametrize(
    "tok,tag",
    [
        ("the", "DET"),
        ("The", "DET"),
        ("42", "NUM"),
        ("3.14", "NUM"),
        ("quickly", "ADV"),
        ("running", "VERB"),
        ("jumped", "VERB"),
        ("famous", "ADJ"),
        ("dog", "NOUN"),
        ("dogs", "NOUN"),
        (",", "PUNCT"),
        ("#", "X"),
        ("and", "CONJ"),
        ("she", "PRON"),
        ("with", "ADP"),
        ("not", "PRT"),
    ],
)
def test_baseline_rules(tok, tag):
    assert baseline_tag([tok]) == [tag]


def test_tagset_closed():
    toks = tokenize("Well, I can't believe 3 dogs quickly ran to the big-ish barn!! :) #tbt")
    tags = baseline_tag(toks)
    assert len(tags) == len(toks)
    assert set(tags) <= TAGSET


def test_tokenize_keeps_contractions():
    assert tokenize("don't stop.") == ["don't", "stop", "."]


def test_empty_input():
    with pytest.raises(ValueError):
        baseline_tag([])
    assert tag_text("   ") == []


def test_tagged_post_length_check():
    with pytest.raises(ValueError):
        TaggedPost("p", ("a", "b"), ("DET",), Channel.POS_B)


def test_external_round_trip(tmp_path):
    posts = [
        TaggedPost("p1", ("the", "dog"), ("DET", "NOUN"), Channel.POS_B),
        TaggedPost("p2", ("runs",), ("VERB",), Channel.POS_B),
    ]
    path = tmp_path / "tags.txt"
    write_external_tags(posts, path)
    assert list(ingest_external_tags(path)) == posts


@pytest.mark.parametrize(
    "body,lineno",
    [
        ("the\tDET\n", 1),
        ("#post p1\nthe DET\n", 2),
        ("#post p1\nthe\t\n", 2),
        ("#post\n", 1),
        ("#post p1\nthe\tDET\ndog\tNOUNISH\n", 3),
    ],
)
def test_external_format_errors(tmp_path, body, lineno):
    path = tmp_path / "tags.txt"
    path.write_text(body)
    with pytest.raises(TagFormatError) as err:
        list(ingest_external_tags(path, tagset=TAGSET))
    assert err.value.lineno == lineno
