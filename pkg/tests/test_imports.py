"""Tests to verify all imports are correct and non-conflicting."""

import importlib


class TestTopLevelImports:
    """Test top-level package imports."""

    def test_adaptsgd_import(self):
        import adaptsgd

        for name in adaptsgd.__all__:
            assert hasattr(adaptsgd, name)

    def test_main_api(self):
        from adaptsgd import ScheduleSpec, sgd_run, step_size

        assert ScheduleSpec is not None
        assert callable(sgd_run)
        assert callable(step_size)


class TestModuleImports:
    """Test that every module imports cleanly."""

    MODULES = [
        "adaptsgd.cli",
        "adaptsgd.core.bounds",
        "adaptsgd.core.errors",
        "adaptsgd.core.experiments",
        "adaptsgd.core.optimizer",
        "adaptsgd.core.schedules",
        "adaptsgd.core.types",
        "adaptsgd.core.verify",
        "adaptsgd.logger",
        "adaptsgd.problems",
        "adaptsgd.utils.config",
        "adaptsgd.utils.csv_utils",
        "adaptsgd.utils.rng",
        "adaptsgd.utils.special",
    ]

    def test_modules(self):
        for name in self.MODULES:
            assert importlib.import_module(name) is not None

    def test_problems_exports(self):
        import adaptsgd.problems

        for name in adaptsgd.problems.__all__:
            assert hasattr(adaptsgd.problems, name)

    def test_logger_exports(self):
        from adaptsgd.logger import RunLogger, VerbosePrinter

        assert RunLogger is not None
        assert VerbosePrinter is not None


class TestErrorHierarchy:
    """Test that adaptsgd errors share one base class."""

    def test_base_class(self):
        from adaptsgd.core import errors

        for name in (
            "ParameterError",
            "DomainError",
            "PreconditionError",
            "ScheduleIndexError",
            "DegeneratePointError",
            "CapabilityError",
            "DivergenceError",
            "EnsembleDivergenceError",
            "ConfigError",
        ):
            assert issubclass(getattr(errors, name), errors.AdaptSGDError)

    def test_parameter_errors_are_value_errors(self):
        from adaptsgd.core.errors import DomainError, PreconditionError

        assert issubclass(DomainError, ValueError)
        assert issubclass(PreconditionError, ValueError)
