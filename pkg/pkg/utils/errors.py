"""Exception types shared across the package.

Each error subclasses the builtin the rest of the code would otherwise raise,
so callers catching ValueError / RuntimeError keep working.
"""


class SingularSymbolError(ValueError):
    def __init__(self, name, wavenumber):
        self.name = name
        self.wavenumber = tuple(float(k) for k in wavenumber)
        super().__init__(f"multiplier '{name}' is not finite at wavenumber {self.wavenumber}")

    def __reduce__(self):
        return type(self), (self.name, self.wavenumber)


class SingularPointError(ValueError):
    pass


class DomainError(ValueError):
    pass


class NearResonanceError(ValueError):
    def __init__(self, index, defect, gate):
        self.index = index
        self.defect = defect
        self.gate = gate
        super().__init__(f"harmonic {index} is near-resonant: defect {defect:.3e} below gate {gate:.1e}")

    def __reduce__(self):
        return type(self), (self.index, self.defect, self.gate)


class DependencyError(ValueError):
    pass


class IncommensurabilityError(ValueError):
    pass


class ConfigError(ValueError):
    def __init__(self, message, line=None, key=None):
        self.message = message
        self.line = line
        self.key = key
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(f"{prefix}{message}")

    def __reduce__(self):
        return type(self), (self.message, self.line, self.key)


class DepthViolationError(RuntimeError):
    def __init__(self, guard, h_min, t=None):
        self.guard = guard
        self.h_min = h_min
        self.t = t
        where = "" if t is None else f" at t = {t:.6g}"
        super().__init__(f"depth guard violated{where}: 1 - eps*max|zeta| = {guard:.6f} < h_min = {h_min}")

    def __reduce__(self):
        return type(self), (self.guard, self.h_min, self.t)


class GateError(RuntimeError):
    def __init__(self, hypothesis, value, threshold):
        self.hypothesis = hypothesis
        self.value = value
        self.threshold = threshold
        super().__init__(f"gate '{hypothesis}' failed: {value:.6g} < {threshold:.6g}")

    def __reduce__(self):
        return type(self), (self.hypothesis, self.value, self.threshold)


class NumericalAbortError(RuntimeError):
    def __init__(self, t, reason="non-finite values"):
        self.t = t
        self.reason = reason
        super().__init__(f"integration aborted at t = {t:.6g}: {reason}")

    def __reduce__(self):
        return type(self), (self.t, self.reason)
