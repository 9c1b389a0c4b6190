"""Exception hierarchy shared by every drdoc module."""


class DrDocError(Exception):
    """Base class for all errors raised by drdoc."""


# --- document model -------------------------------------------------------

class EmptyDocument(DrDocError, ValueError):
    pass


class EmptyCaption(DrDocError, ValueError):
    def __init__(self, frame_id: int):
        super().__init__(f"caption for frame {frame_id} is blank")
        self.frame_id = frame_id


class InvalidSampling(DrDocError, ValueError):
    pass


class UnknownFrame(DrDocError, KeyError):
    def __init__(self, frame_id: int, total: int):
        super().__init__(f"frame {frame_id} outside 1..{total}")
        self.frame_id = frame_id
        self.total = total

    def __str__(self) -> str:
        return self.args[0]


class DuplicateAugmentation(DrDocError):
    def __init__(self, frame_id: int, kind):
        super().__init__(f"frame {frame_id} already carries type {kind} information")
        self.frame_id = frame_id
        self.kind = kind


class CorruptDocument(DrDocError, ValueError):
    pass


# --- backends ---------------------------------------------------------------

class BackendError(DrDocError):
    pass


class BackendUnavailable(BackendError):
    pass


class MalformedResponse(BackendError):
    pass


class EmptyCaptionReturned(BackendError):
    pass


class ScriptExhausted(BackendError):
    """A scripted backend has no response left for the requested role."""


class DimensionMismatch(DrDocError, ValueError):
    pass


# --- retrieval ---------------------------------------------------------------

class ZeroVector(DrDocError, ValueError):
    pass


# --- agent output parsing ----------------------------------------------------

class NoStructureFound(DrDocError, ValueError):
    pass


class UnparseableVerdict(DrDocError):
    pass


class UnparseableRequests(DrDocError):
    pass


class UnparseableAnswer(DrDocError):
    pass


class InvalidLetter(DrDocError):
    def __init__(self, letter: str, allowed):
        super().__init__(f"answer {letter!r} not among options {''.join(allowed)}")
        self.letter = letter
        self.allowed = tuple(allowed)


# --- harness -----------------------------------------------------------------

class SchemaError(DrDocError, ValueError):
    def __init__(self, line: int, field: str, message: str = ""):
        text = f"line {line}: field {field!r}"
        if message:
            text += f": {message}"
        super().__init__(text)
        self.line = line
        self.field = field


class MissingCache(DrDocError, FileNotFoundError):
    def __init__(self, video_id: str):
        super().__init__(f"no cached document for video {video_id!r}")
        self.video_id = video_id

    def __str__(self) -> str:
        return self.args[0]
