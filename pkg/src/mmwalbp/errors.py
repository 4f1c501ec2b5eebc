"""Exception hierarchy shared by every module of the package."""


class MmwalbpError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(MmwalbpError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvalidInstance(MmwalbpError):
    pass


class JointPrecedenceCycle(InvalidInstance):
    pass


class EmptyPlan(InvalidInstance):
    pass


class CyclicPrecedence(InvalidInstance):
    pass


class InvalidPosition(MmwalbpError):
    pass


class InfeasibleTask(MmwalbpError):
    def __init__(self, task_id: int, message: str = ""):
        self.task_id = task_id
        super().__init__(message or f"task {task_id} fits no workplace even in a fresh station")


class InfeasibleWorkload(MmwalbpError):
    pass


class InvalidConfig(MmwalbpError):
    pass


class GenError(MmwalbpError):
    pass


class PoolError(MmwalbpError):
    pass
