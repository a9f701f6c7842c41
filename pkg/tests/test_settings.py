import pytest

from config.settings import apply_override, build_config, load_defaults
from core.errors import CommandLineError


def test_defaults_match_documented_values():
    cfg = load_defaults()
    assert cfg.job_template_suffix == ".jt"
    assert cfg.job_template_prefix == ""
    assert cfg.job_template_wildcard == "${JT_ID}"
    assert cfg.Template_job_name == "NAME"
    assert cfg.Template_executable == "EXECUTABLE"
    assert cfg.Template_encloser_char == ""
    assert cfg.use_bignum == 0
    assert cfg.separation_char == ","
    assert cfg.separation_char_cli == " "
    assert cfg.unix_operators == "&|<>;()`"
    assert cfg.gridway_submit == "gwsubmit"
    assert cfg.gridway_submit_flag == ""
    assert cfg.huge_number_points == 10000
    assert cfg.inode_size_kB == 4
    assert cfg.backend == "local"
    assert cfg.rng_seed is None
    assert cfg.max_parallel >= 1


def test_load_defaults_is_pure():
    assert load_defaults() == load_defaults()


def test_override_coerces_integers():
    assert apply_override(load_defaults(), "use_bignum=1").use_bignum == 1


def test_override_changes_only_its_key():
    before = load_defaults()
    after = apply_override(before, "job_template_suffix=.jdl")
    assert after.job_template_suffix == ".jdl"
    changed = {k for k in type(before).model_fields if getattr(before, k) != getattr(after, k)}
    assert changed == {"job_template_suffix"}


def test_override_is_idempotent():
    once = apply_override(load_defaults(), "separation_char_filename=-")
    assert apply_override(once, "separation_char_filename=-") == once


def test_last_writer_wins():
    assert build_config(["use_bignum=1", "use_bignum=0"]).use_bignum == 0


def test_value_may_contain_assignment_char():
    assert apply_override(load_defaults(), "gridway_submit_flag=--opt=1").gridway_submit_flag == "--opt=1"


def test_template_keys_are_case_sensitive():
    cfg = apply_override(load_defaults(), "Template_end_of_line=;")
    assert cfg.Template_end_of_line == ";"
    with pytest.raises(CommandLineError):
        apply_override(load_defaults(), "template_end_of_line=;")


def test_empty_seed_clears_it():
    seeded = apply_override(load_defaults(), "rng_seed=7")
    assert seeded.rng_seed == 7
    assert apply_override(seeded, "rng_seed=").rng_seed is None


@pytest.mark.parametrize("assignment", [
    "no_such_key=1",
    "use_bignum",
    "=1",
    "use_bignum=2",
    "backend=condor",
    "comment_char=##",
    "huge_number_points=many",
])
def test_bad_override_is_a_command_line_error(assignment):
    with pytest.raises(CommandLineError) as excinfo:
        apply_override(load_defaults(), assignment)
    assert excinfo.value.exit_code == 1
