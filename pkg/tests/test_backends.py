import os
import signal
import time

import pytest

from backends.external_backend import ExternalBackend
from backends.local_backend import LocalBackend
from backends.simulated_backend import SimulatedBackend, parse_sim_hosts
from config.settings import apply_override
from conftest import write_script
from core.commands import parse_signal, quote_for_log, split_arguments
from core.errors import BackendUnavailableError, CommandLineError, ExecutionError
from core.event_log import JobState, Manager, Status
from core.grammar import parse_parameter_file
from core.registry import RegistryEntry
from core.templates import create_templates, discover_templates


def submit_all(backend, workdir):
    entries = []
    for template in discover_templates(backend.cfg, str(workdir)):
        name = f"{template.index}_job"
        epoch = backend.now()
        job_id = backend.submit_job(os.path.join(str(workdir), template.filename), name)
        entries.append(RegistryEntry(filename=template.filename, job_name=name, job_id=job_id, epoch=epoch))
    return entries


def make_templates(cfg, text, worker):
    create_templates(parse_parameter_file(text, cfg), worker, None, cfg)


# --- simulated -------------------------------------------------------------

def simulated(cfg, workdir, clock, hosts=None, **overrides):
    if hosts is not None:
        cfg = apply_override(cfg, f"sim_hosts={hosts}")
    for key, value in overrides.items():
        cfg = apply_override(cfg, f"{key}={value}")
    return SimulatedBackend(cfg, workdir=str(workdir), clock=clock)


def statuses(events):
    return [(e.manager.value, e.status.value) for e in events]


def test_first_job_learns_which_hosts_deny(cfg, workdir, clock):
    backend = simulated(cfg, workdir, clock)
    first = backend.trace("0_square", clock())
    assert [e.status for e in first].count(Status.EPILOG_FAIL) == 2
    assert [e.host_name for e in first if e.status is Status.EPILOG_FAIL] == ["egee.srce.hr", "grid.acad.bg"]
    assert statuses(first[-1:]) == [("DISPATCH", "DONE")]
    assert first[-1].exit_status == 0 and first[-1].host_name == "gridway.org"
    second = backend.trace("1_square", clock())
    assert Status.EPILOG_FAIL not in [e.status for e in second]


def test_host_ranks_persist_between_invocations(cfg, workdir, clock):
    simulated(cfg, workdir, clock).submit_job("0_square_1.jt", "0_square")
    later = simulated(cfg, workdir, clock)
    later._load_ranks()
    assert [h.rank for h in later.hosts] == [-1, -1, 0]
    later.submit_job("1_square_2.jt", "1_square")
    events = later.event_log.for_job("1_square")
    assert Status.EPILOG_FAIL not in [e.status for e in events]


def test_single_allowing_host_gives_the_full_lifecycle(cfg, workdir, clock):
    backend = simulated(cfg, workdir, clock, hosts="default@gridway.org:allow")
    events = backend.trace("0_square", clock())
    assert statuses(events) == [
        ("DISPATCH", "PENDING"),
        ("DISPATCH", "PROLOG"),
        ("DISPATCH", "WRAPPER"),
        ("EXECUTION", "PENDING"),
        ("EXECUTION", "ACTIVE"),
        ("EXECUTION", "DONE"),
        ("DISPATCH", "EPILOG_STD"),
        ("DISPATCH", "EPILOG"),
        ("DISPATCH", "DONE"),
    ]
    assert [e.is_terminal for e in events].count(True) == 1


def test_all_hosts_denying_fails_after_the_retry_cap(cfg, workdir, clock):
    backend = simulated(cfg, workdir, clock, hosts="a@one:deny b@two:deny", sim_retry_cap=2)
    events = backend.trace("0_square", clock())
    assert [e.status for e in events].count(Status.EPILOG_FAIL) == 2
    assert statuses(events[-1:]) == [("DISPATCH", "FAILED")]


def test_traces_only_use_legal_transitions(cfg, workdir, clock):
    legal_after = {
        ("DISPATCH", "PENDING"): {("DISPATCH", "PROLOG"), ("DISPATCH", "FAILED")},
        ("DISPATCH", "PROLOG"): {("DISPATCH", "WRAPPER")},
        ("DISPATCH", "WRAPPER"): {("EXECUTION", "PENDING"), ("EXECUTION", "FAILED")},
        ("EXECUTION", "PENDING"): {("EXECUTION", "ACTIVE")},
        ("EXECUTION", "ACTIVE"): {("EXECUTION", "DONE")},
        ("EXECUTION", "DONE"): {("DISPATCH", "EPILOG_STD")},
        ("EXECUTION", "FAILED"): {("DISPATCH", "EPILOG_FAIL")},
        ("DISPATCH", "EPILOG_STD"): {("DISPATCH", "EPILOG")},
        ("DISPATCH", "EPILOG_FAIL"): {("DISPATCH", "PENDING")},
        ("DISPATCH", "EPILOG"): {("DISPATCH", "DONE")},
    }
    backend = simulated(cfg, workdir, clock, hosts="a@one:deny:30 b@two:allow:30 c@three:deny", rng_seed=7)
    for k in range(10):
        events = backend.trace(f"{k}_job", clock())
        pairs = statuses(events)
        assert pairs[0] == ("DISPATCH", "PENDING")
        for before, after in zip(pairs, pairs[1:]):
            assert after in legal_after[before], pairs
        assert [e.time for e in events] == sorted(e.time for e in events)


def test_same_seed_same_trace(cfg, workdir, clock):
    hosts = "a@one:deny:20 b@two:allow:20"
    first = simulated(cfg, workdir, clock, hosts=hosts, rng_seed=3).trace("0_job", clock())
    second = simulated(cfg, workdir, clock, hosts=hosts, rng_seed=3).trace("0_job", clock())
    assert first == second


def test_delayed_events_appear_as_the_clock_advances(cfg, workdir, clock):
    backend = simulated(cfg, workdir, clock, hosts="q@slow:allow:50", rng_seed=1)
    epoch = clock()
    job_id = backend.submit_job("0_job_x.jt", "0_job")
    entry = RegistryEntry(filename="0_job_x.jt", job_name="0_job", job_id=job_id, epoch=epoch)
    final = backend.event_log.for_job("0_job")[-1]
    assert job_id == f"0_job@{epoch}"
    if final.time > epoch:
        assert backend.state(entry) is JobState.RUNNING
    clock.advance(final.time - epoch)
    assert backend.state(entry) is JobState.SUCCESSFUL
    assert len(backend.events(entry)) == 9


def test_killing_a_simulated_job(cfg, workdir, clock):
    backend = simulated(cfg, workdir, clock, hosts="q@slow:allow:1000", rng_seed=5)
    epoch = clock()
    job_id = backend.submit_job("0_job_x.jt", "0_job")
    entry = RegistryEntry(filename="0_job_x.jt", job_name="0_job", job_id=job_id, epoch=epoch)
    clock.advance(1)
    backend.kill_job(entry, "9")
    clock.advance(10000)
    assert backend.state(entry) is JobState.UNSUCCESSFUL
    assert backend.events(entry)[-1].status is Status.FAILED


@pytest.mark.parametrize("declaration", ["", "nohost:allow", "q@h", "q@h:maybe", "q@h:allow:soon", "q@h:allow:1:2"])
def test_bad_host_declarations(declaration):
    with pytest.raises(CommandLineError):
        parse_sim_hosts(declaration)


def test_host_declaration_with_delay():
    (host,) = parse_sim_hosts("default@gridway.org:allow:15")
    assert (host.queue, host.name, host.permits_execution, host.max_delay) == ("default", "gridway.org", True, 15)


# --- local -----------------------------------------------------------------

def wait_for_status(backend, entry, status, timeout=30):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        if status in [e.status for e in backend.events(entry)]:
            return
        time.sleep(0.1)
    raise AssertionError(f"{entry.job_name} never reached {status}")


def test_local_job_runs_and_writes_its_output(cfg, workdir):
    make_templates(cfg, 'LOOPTYPE=LIST, VALUE="Hello world!"', "/bin/echo")
    backend = LocalBackend(cfg, workdir=str(workdir))
    entries = submit_all(backend, workdir)
    backend.wait_jobs(entries, poll_seconds=0.1, timeout=30)
    assert (workdir / "0_echo_Hello_world!.out").read_text() == "Hello world!\n"
    history = backend.events(entries[0])
    assert history[0].status is Status.PENDING
    assert history[-1].status is Status.DONE and history[-1].exit_status == 0
    assert history[-1].queue_name == "local"
    assert backend.state(entries[0]) is JobState.SUCCESSFUL


def test_local_exit_status_is_recorded(cfg, workdir):
    write_script(workdir, "fail", "echo oops >&2\nexit 3")
    make_templates(cfg, "LOOPTYPE=LIST, VALUE=a", "fail")
    backend = LocalBackend(cfg, workdir=str(workdir))
    entries = submit_all(backend, workdir)
    backend.wait_jobs(entries, poll_seconds=0.1, timeout=30)
    assert backend.events(entries[0])[-1].exit_status == 3
    assert backend.state(entries[0]) is JobState.UNSUCCESSFUL
    assert (workdir / "0_fail_a.err").read_text() == "oops\n"


def test_local_missing_executable_fails(cfg, workdir):
    write_script(workdir, "vanishing", "true")
    make_templates(cfg, "LOOPTYPE=LIST, VALUE=a", "vanishing")
    os.remove(workdir / "vanishing")
    backend = LocalBackend(cfg, workdir=str(workdir))
    entries = submit_all(backend, workdir)
    backend.wait_jobs(entries, poll_seconds=0.1, timeout=30)
    last = backend.events(entries[0])[-1]
    assert (last.manager, last.status) == (Manager.DISPATCH, Status.FAILED)


def test_local_kill(cfg, workdir):
    write_script(workdir, "nap", "sleep 30")
    make_templates(cfg, "LOOPTYPE=LIST, VALUE=a", "nap")
    backend = LocalBackend(cfg, workdir=str(workdir))
    entries = submit_all(backend, workdir)
    wait_for_status(backend, entries[0], Status.ACTIVE)
    assert backend.state(entries[0]) is JobState.RUNNING
    backend.kill_job(entries[0], "KILL")
    backend.wait_jobs(entries, poll_seconds=0.1, timeout=30)
    assert backend.state(entries[0]) is JobState.UNSUCCESSFUL


def test_argument_splitting():
    assert split_arguments('Exact 1000 "a b.txt"') == ["Exact", "1000", "a b.txt"]
    assert split_arguments("a;b;c", ";") == ["a", "b", "c"]
    assert split_arguments("") == []
    assert split_arguments("it's") == ["it's"]
    with pytest.raises(ValueError):
        split_arguments('"open')


def test_log_quoting():
    assert quote_for_log(["echo", "a|b", "c"], "&|<>;()`") == "echo 'a|b' c"


@pytest.mark.parametrize("token, expected", [
    (None, signal.SIGTERM),
    ("9", signal.SIGKILL),
    ("KILL", signal.SIGKILL),
    ("sigint", signal.SIGINT),
    ("SIGUSR1", signal.SIGUSR1),
])
def test_signal_parsing(token, expected):
    assert parse_signal(token) is expected


@pytest.mark.parametrize("token", ["999", "NOPE", "-9"])
def test_bad_signals(token):
    with pytest.raises(CommandLineError):
        parse_signal(token)


# --- external --------------------------------------------------------------

def external(cfg, workdir, **overrides):
    for key, value in overrides.items():
        cfg = apply_override(cfg, f"{key}={value}")
    return ExternalBackend(cfg, workdir=str(workdir))


def test_external_submit_streams_output(cfg, workdir, capsys):
    write_script(workdir, "fake-submit", 'echo "$@" >> submitted.log\necho "JOB ID: 7"')
    backend = external(cfg, workdir, gridway_submit="fake-submit", gridway_submit_flag="-a")
    assert backend.submit_job(str(workdir / "0_env_ps.jdl"), "0_env") == "0_env_ps.jdl"
    assert (workdir / "submitted.log").read_text() == "-a 0_env_ps.jdl\n"
    assert capsys.readouterr().out == "JOB ID: 7\n"


def test_external_commands_under_the_install_dir(cfg, workdir, tmp_path_factory):
    install = tmp_path_factory.mktemp("gridway")
    os.mkdir(install / "bin")
    write_script(install / "bin", "gwsubmit", "echo from-install")
    backend = external(cfg, workdir, gridway_dir_var=str(install))
    assert backend._command("gwsubmit") == str(install / "bin" / "gwsubmit")


def test_external_submit_failure(cfg, workdir):
    write_script(workdir, "fake-submit", "exit 1")
    with pytest.raises(ExecutionError) as excinfo:
        external(cfg, workdir, gridway_submit="fake-submit").submit_job("0_a.jt", "0_a")
    assert excinfo.value.exit_code == 2


def test_external_missing_command(cfg, workdir, monkeypatch):
    monkeypatch.setenv("PATH", str(workdir))
    with pytest.raises(ExecutionError) as excinfo:
        external(cfg, workdir, gridway_submit="no-such-gwsubmit").submit_job("0_a.jt", "0_a")
    assert excinfo.value.exit_code == 2


def test_external_kill_passes_the_signal(cfg, workdir):
    write_script(workdir, "fake-kill", 'echo "$@" >> killed.log')
    backend = external(cfg, workdir, gridway_kill="fake-kill")
    entry = RegistryEntry(filename="0_a.jt", job_name="0_a", job_id="0_a.jt", epoch=0)
    backend.kill_job(entry, "9")
    backend.kill_job(entry)
    assert (workdir / "killed.log").read_text() == "-9 0_a.jt\n0_a.jt\n"


def test_external_wait(cfg, workdir):
    write_script(workdir, "fake-wait", 'echo "$@" >> waited.log')
    backend = external(cfg, workdir, gridway_wait="fake-wait")
    entries = [RegistryEntry(filename=f"{k}_a.jt", job_name=f"{k}_a", job_id=f"{k}_a.jt", epoch=0) for k in range(2)]
    backend.wait_jobs(entries)
    assert (workdir / "waited.log").read_text() == "0_a.jt 1_a.jt\n"


def test_external_has_no_events(cfg, workdir):
    entry = RegistryEntry(filename="0_a.jt", job_name="0_a", job_id="0_a.jt", epoch=0)
    with pytest.raises(BackendUnavailableError) as excinfo:
        external(cfg, workdir).events(entry)
    assert excinfo.value.exit_code == 3
