from dataclasses import dataclass

import numpy as np

from ..exceptions import DomainError

BENEFIT_FAMILIES = ('scaled_saturating_exp', 'log1p', 'power', 'tabulated')
COST_FAMILIES = ('exp_scaled', 'tabulated')


def _check_domain(eps):
    """Returns the privacy levels as a float array after checking they lie in [0, 1]."""
    values = np.asarray(eps, dtype=float)
    outside = ~((values >= 0) & (values <= 1))
    if outside.any():
        raise DomainError('privacy level must be in [0, 1], got %s' % float(values[outside].flat[0]))
    return values


def _as_output(eps, values):
    if np.ndim(eps) == 0: return float(values)
    return values


def _check_knots(eps, values):
    """Validates and formats the knots of a piecewise-linear function."""
    eps = tuple(float(x) for x in eps)
    values = tuple(float(y) for y in values)
    assert len(eps) >= 2, 'tabulated function needs at least two knots'
    assert len(eps) == len(values), 'knot lengths must match'
    assert np.all(np.diff(eps) > 0), 'knots must be strictly increasing'
    assert eps[0] == 0 and eps[-1] == 1, 'knots must cover [0, 1]'
    return eps, values


@dataclass(frozen=True)
class BenefitFunction:
    """The benefit an honest buyer derives from a bundle with privacy level eps.

    Args:
        family (str): One of 'scaled_saturating_exp', 'log1p', 'power' or 'tabulated'.
        scale (float): Scale a of the parametric families.
        rate (float): Rate k of the saturating exponential a(1 - exp(-k eps)).
        exponent (float): Exponent of the power family a eps^exponent, in (0, 1].
        knots_eps (tuple): Knot positions of a tabulated function.
        knots_values (tuple): Knot values of a tabulated function.
        type_index (int): Index of the buyer type owning the function (1-based).

    Examples:
        >>> b = BenefitFunction('scaled_saturating_exp', scale=2, rate=5)
        >>> round(b(1), 6)
        1.986524
    """
    family: str
    scale: float = 1.0
    rate: float = None
    exponent: float = None
    knots_eps: tuple = None
    knots_values: tuple = None
    type_index: int = 1

    def __post_init__(self):
        assert self.family in BENEFIT_FAMILIES, 'unknown benefit family "%s"' % self.family
        assert self.type_index >= 1, 'type index must be positive'
        for name in ('scale', 'rate', 'exponent'):
            value = getattr(self, name)
            if value is not None: object.__setattr__(self, name, float(value))

        if self.family == 'scaled_saturating_exp':
            assert self.rate is not None, 'saturating exponential needs a rate'

        if self.family == 'power':
            assert self.exponent is not None, 'power family needs an exponent'
            assert 0 < self.exponent <= 1, 'exponent must be in (0, 1]'

        if self.family == 'tabulated':
            knots = _check_knots(self.knots_eps, self.knots_values)
            object.__setattr__(self, 'knots_eps', knots[0])
            object.__setattr__(self, 'knots_values', knots[1])

    def __call__(self, eps):
        return eval_benefit(self, eps)

    @property
    def is_parametric(self):
        return self.family != 'tabulated'

    def to_dict(self):
        """Returns the parameters that define the function."""
        if self.family == 'tabulated':
            return {'family': self.family, 'eps': list(self.knots_eps), 'values': list(self.knots_values)}

        value = {'family': self.family, 'scale': self.scale}
        if self.family == 'scaled_saturating_exp': value['rate'] = self.rate
        if self.family == 'power': value['exponent'] = self.exponent
        return value

    @classmethod
    def from_dict(cls, data, type_index=1):
        """Creates a benefit function from its parameters."""
        data = dict(data)
        family = data.pop('family')
        if family == 'tabulated':
            return cls(family, knots_eps=data['eps'], knots_values=data['values'], type_index=type_index)

        return cls(family, type_index=type_index, **data)


@dataclass(frozen=True)
class AdversaryCost:
    """The cost C(eps) an adversary can impose by abusing a bundle with privacy level eps.

    Args:
        family (str): Either 'exp_scaled' for K(exp(eps) - 1) or 'tabulated'.
        scale (float): Scale K of the exponential family.
        knots_eps (tuple): Knot positions of a tabulated function.
        knots_values (tuple): Knot values of a tabulated function.
    """
    family: str
    scale: float = 1.0
    knots_eps: tuple = None
    knots_values: tuple = None

    def __post_init__(self):
        assert self.family in COST_FAMILIES, 'unknown cost family "%s"' % self.family
        object.__setattr__(self, 'scale', float(self.scale))

        if self.family == 'tabulated':
            knots = _check_knots(self.knots_eps, self.knots_values)
            object.__setattr__(self, 'knots_eps', knots[0])
            object.__setattr__(self, 'knots_values', knots[1])

    def __call__(self, eps):
        return eval_cost(self, eps)

    def to_dict(self):
        if self.family == 'tabulated':
            return {'family': self.family, 'eps': list(self.knots_eps), 'values': list(self.knots_values)}

        return {'family': self.family, 'scale': self.scale}

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        family = data.pop('family')
        if family == 'tabulated':
            return cls(family, knots_eps=data['eps'], knots_values=data['values'])

        return cls(family, **data)


def eval_benefit(f, eps):
    """Evaluates a benefit function.

    Args:
        f (BenefitFunction): The benefit function.
        eps (float or array): Privacy levels in [0, 1].

    Returns:
        value (float or array): Analytic value for parametric families, linear interpolation for tabulated ones.

    Examples:
        >>> f = BenefitFunction('log1p', scale=2)
        >>> eval_benefit(f, 0)
        0.0
        >>> eval_benefit(f, 1.5)
        Traceback (most recent call last):
        ...
        advcontracts.exceptions.DomainError: privacy level must be in [0, 1], got 1.5
    """
    values = _check_domain(eps)

    if f.family == 'scaled_saturating_exp':
        values = f.scale * -np.expm1(-f.rate * values)
    elif f.family == 'log1p':
        values = f.scale * np.log1p(values)
    elif f.family == 'power':
        values = f.scale * np.power(values, f.exponent)
    else:
        values = np.interp(values, f.knots_eps, f.knots_values)

    return _as_output(eps, values)


def eval_cost(c, eps):
    """Evaluates the adversary cost.

    Args:
        c (AdversaryCost): The adversary cost.
        eps (float or array): Privacy levels in [0, 1].

    Returns:
        value (float or array): Cost at the privacy levels.
    """
    values = _check_domain(eps)

    if c.family == 'exp_scaled':
        values = c.scale * np.expm1(values)
    else:
        values = np.interp(values, c.knots_eps, c.knots_values)

    return _as_output(eps, values)
