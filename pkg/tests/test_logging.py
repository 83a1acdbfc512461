"""Test structured logging functionality."""

import json
import logging

from core.logging import (
    CommandLogger,
    LoggingMixin,
    RepositoryLogger,
    active_logging_config,
    configure_logging,
    get_logger,
    get_run_id,
    init_worker,
    set_run_id,
)


def test_run_id_management():
    """Test run ID context management."""
    run_id = set_run_id("test-run-id")
    assert run_id == "test-run-id"
    assert get_run_id() == "test-run-id"

    # Test auto-generation
    auto_id = set_run_id()
    assert auto_id != "test-run-id"
    assert len(auto_id) == 12


def test_logger_initialization():
    """Test logger initialization."""
    logger = get_logger("test-component")
    assert logger is not None
    assert hasattr(logger, "info")
    assert hasattr(logger, "error")
    assert hasattr(logger, "debug")


def test_logging_mixin():
    """Test LoggingMixin functionality."""

    class SceneService(LoggingMixin):
        pass

    service = SceneService()
    assert service.logger is not None
    service.log_operation_start("build", scene_id="s")
    service.log_operation_success("build", scene_id="s")
    service.log_validation_error("build", ["not rigid"], scene_id="s")
    service.log_operation_error("build", ValueError("boom"), scene_id="s")


def test_command_logger():
    """Test command logging utilities."""
    # Test static methods don't raise errors
    CommandLogger.log_command_start("build-graph", run_id="abc")
    CommandLogger.log_command_complete("build-graph", exit_code=0, duration_ms=12.345)
    CommandLogger.log_command_complete("build-graph", exit_code=1, duration_ms=1.0)


def test_repository_logger():
    """Test file logging utilities."""
    RepositoryLogger.log_read("scene", "/tmp/scene.json", 120, sha256="0" * 64)
    RepositoryLogger.log_write("graph", "/tmp/graph.json", 512)


def test_json_logs_go_to_stderr(capsys):
    """Test JSON rendering carries run id and tool context, on stderr only."""
    configure_logging(level="INFO", json_output=True)
    set_run_id("run-1")

    get_logger("cli").info("hello", scene_id="s")

    captured = capsys.readouterr()
    assert captured.out == ""
    event = json.loads(captured.err.strip().splitlines()[-1])
    assert event["event"] == "hello"
    assert event["run_id"] == "run-1"
    assert event["tool"] == "scene-scaffold"
    assert event["scene_id"] == "s"


def test_logging_configuration():
    """Test the level comes from the argument, then settings."""
    configure_logging(level="DEBUG")
    assert logging.getLogger().level == logging.DEBUG

    configure_logging()
    assert logging.getLogger().level == logging.WARNING


def test_worker_initializer_matches_parent(capsys):
    """Test a worker set up from the parent's config logs the same way under the same run id."""
    configure_logging(level="debug", json_output=True)
    level, json_output = active_logging_config()
    assert (level, json_output) == ("DEBUG", True)

    set_run_id("other")
    init_worker(level, json_output, "run-parent")
    get_logger("worker").debug("placed", scene_id="s")

    captured = capsys.readouterr()
    assert captured.out == ""
    event = json.loads(captured.err.strip().splitlines()[-1])
    assert event["event"] == "placed"
    assert event["run_id"] == "run-parent"
    assert get_run_id() == "run-parent"
