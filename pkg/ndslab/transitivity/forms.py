from django import forms
from django.core.exceptions import ValidationError

from .exceptions import DynamicsError
from .services import gallery
from .services.phase_spaces import as_rational
from .services.reports import system_from_record
from .services.systems import NDSystem


CHECK_CHOICES = [
    ('CC', 'Uniform convergence of windows'),
    ('CCstar', 'Orbital convergence of fiber powers'),
    ('L', 'Vanishing diagonal window distance'),
    ('Lstar', 'Vanishing diagonal fiber distance'),
    ('DO', 'Dense diagonal window orbit'),
    ('DOstar', 'Dense diagonal fiber orbit'),
    ('transitivity', 'Grid transitivity of the limit'),
    ('nds-transitivity', 'Grid transitivity of the system'),
    ('sensitivity', 'Sensitivity of the limit'),
    ('orbit-coverage', 'Coverage by the orbit f_1^n(x)'),
    ('invariant-interval', 'Invariant interval of the limit'),
    ('fix-inclusion', 'Fixed points and preimage trees of f and f_n'),
    ('prefix-agreement', 'Agreement of f_n and f on prefix points'),
    ('agreement-measure', 'Measure of {f_n = f}'),
    ('eventual-equality', 'Eventual equality f_n = f'),
    ('equivalence', 'Window hitting, dense orbit and transitivity'),
    ('fiber-inheritance', 'Transitive fibers and (CC*)'),
    ('nds-inheritance', 'Transitivity of f and of the system under (CC)'),
    ('invariant-intervals', 'Invariant intervals of the fibers'),
]

FORMAT_CHOICES = [('jsonl', 'JSON lines'), ('csv', 'CSV summary')]
MODE_CHOICES = [('exact', 'Exact'), ('sample', 'Sampled grid')]


class RationalField(forms.Field):
    """Exact "p/q" rational; decimals and floats are refused."""

    def __init__(self, *, positive=False, **kwargs):
        self.positive = positive
        super().__init__(**kwargs)

    def to_python(self, value):
        if value in self.empty_values:
            return None
        try:
            value = as_rational(value)
        except DynamicsError as exc:
            raise ValidationError(str(exc), code='invalid')
        if self.positive and value <= 0:
            raise ValidationError(f'must be positive, got {value}', code='min_value')
        return value


class RationalListField(forms.Field):
    def to_python(self, value):
        if value in self.empty_values:
            return []
        if not isinstance(value, list):
            raise ValidationError('expected a list of "p/q" rationals', code='invalid')
        field = RationalField(positive=True)
        return [field.clean(item) for item in value]


class StrictForm(forms.Form):
    """A form over a JSON object that rejects keys it does not declare."""

    def __init__(self, data=None, *args, **kwargs):
        if data is not None and not isinstance(data, dict):
            self.non_object = True
            data = {}
        else:
            self.non_object = False
        super().__init__(data, *args, **kwargs)

    def clean(self):
        cleaned = super().clean()
        if self.non_object:
            raise ValidationError('expected an object')
        unknown = sorted(set(self.data) - set(self.fields))
        if unknown:
            raise ValidationError(f'unknown fields {unknown}', code='unknown')
        return cleaned


class TruncationForm(StrictForm):
    N_max = forms.IntegerField(min_value=1, required=False)
    K_max = forms.IntegerField(min_value=1, required=False)
    L = forms.IntegerField(min_value=1, required=False)
    eps = RationalListField(required=False)
    horizon = forms.IntegerField(min_value=1, required=False)


class OutputForm(StrictForm):
    format = forms.ChoiceField(choices=FORMAT_CHOICES, required=False)
    path = forms.CharField(max_length=4096)


class CheckForm(StrictForm):
    check = forms.ChoiceField(choices=CHECK_CHOICES)
    eps = RationalField(positive=True, required=False)
    grid_eps = RationalField(positive=True, required=False)
    delta = RationalField(positive=True, required=False)
    radius = RationalField(positive=True, required=False)
    threshold = RationalField(positive=True, required=False)
    x0 = forms.CharField(max_length=256, required=False)
    p = RationalField(required=False)
    seed = forms.JSONField(required=False)
    n = forms.IntegerField(min_value=1, required=False)
    N_max = forms.IntegerField(min_value=1, required=False)
    K_max = forms.IntegerField(min_value=1, required=False)
    horizon = forms.IntegerField(min_value=1, required=False)
    depth = forms.IntegerField(min_value=0, required=False)
    mode = forms.ChoiceField(choices=MODE_CHOICES, required=False)
    expect = forms.CharField(max_length=64, required=False)


class ExperimentConfigForm(StrictForm):
    system = forms.JSONField()
    checks = forms.JSONField(required=False)
    truncation = forms.JSONField(required=False)
    output = forms.JSONField()

    def clean_system(self):
        record = self.cleaned_data['system']
        if not isinstance(record, dict):
            raise ValidationError('expected an object')
        try:
            if 'gallery' in record:
                unknown = sorted(set(record) - {'gallery', 'params'})
                if unknown:
                    raise ValidationError(f'unknown fields {unknown}')
                system, _ = gallery.build(record['gallery'], record.get('params'))
                return system
            return system_from_record(record)
        except (DynamicsError, TypeError, ValueError) as exc:
            raise ValidationError(str(exc))

    def clean_checks(self):
        items = self.cleaned_data.get('checks') or []
        if not isinstance(items, list):
            raise ValidationError('expected a list of checks')
        cleaned, problems = [], []
        for index, item in enumerate(items):
            form = CheckForm(item)
            if form.is_valid():
                cleaned.append({key: value for key, value in form.cleaned_data.items() if value not in (None, '', [])})
            else:
                problems.extend(_flatten(f'checks[{index}]', form))
        if problems:
            raise ValidationError(problems)
        return cleaned

    def clean_truncation(self):
        return _nested(TruncationForm, 'truncation', self.cleaned_data.get('truncation') or {})

    def clean_output(self):
        output = _nested(OutputForm, 'output', self.cleaned_data.get('output'))
        output['format'] = output.get('format') or 'jsonl'
        return output

    def clean(self):
        cleaned = super().clean()
        system, truncation = cleaned.get('system'), cleaned.get('truncation') or {}
        if system is not None and 'L' in truncation and system.family_name == 'adding-machine' \
                and dict(system.params).get('word_length') is None:
            cleaned['system'] = NDSystem.from_family(
                'adding-machine', {'word_length': truncation['L']}, system.prefix, system.name)
        return cleaned


def _flatten(prefix, form):
    messages = []
    for field, errors in form.errors.items():
        label = prefix if field == '__all__' else f'{prefix}.{field}'
        messages.extend(f'{label}: {error}' for error in errors)
    return messages


def _nested(form_class, prefix, data):
    form = form_class(data)
    if not form.is_valid():
        raise ValidationError(_flatten(prefix, form))
    return {key: value for key, value in form.cleaned_data.items() if value not in (None, '', [])}


def config_errors(form):
    """Flat "field: message" strings for every error of an ExperimentConfigForm."""
    return _flatten('config', form)
