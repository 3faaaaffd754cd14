import json
import logging
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from transitivity.exceptions import DynamicsError
from transitivity.forms import ExperimentConfigForm, config_errors
from transitivity.services import experiments, reports

logger = logging.getLogger(__name__)

ASSERTION_FAILED = 1
SCHEMA_VIOLATION = 2
EXECUTION_ERROR = 3


class Command(BaseCommand):
    help = 'Run the checks of an experiment config and write one report record per check.'

    def add_arguments(self, parser):
        parser.add_argument('config', help='Path to a JSON experiment config.')

    def handle(self, *args, **options):
        path = Path(options['config'])
        try:
            data = json.loads(path.read_text(encoding='utf-8'))
        except OSError as exc:
            raise CommandError(f'cannot read {path}: {exc}', returncode=SCHEMA_VIOLATION)
        except json.JSONDecodeError as exc:
            raise CommandError(f'{path} is not valid JSON: {exc}', returncode=SCHEMA_VIOLATION)

        form = ExperimentConfigForm(data)
        if not form.is_valid():
            raise CommandError('; '.join(config_errors(form)), returncode=SCHEMA_VIOLATION)
        config = form.cleaned_data
        system, output = config['system'], config['output']

        try:
            outcomes = experiments.run_checks(system, config['checks'], config['truncation'])
            if output['format'] == 'csv':
                reports.write_csv(output['path'], experiments.SUMMARY_HEADER, experiments.summary_rows(outcomes))
            else:
                reports.write_jsonl(output['path'], [outcome.record for outcome in outcomes])
        except DynamicsError as exc:
            logger.exception('experiment on %s failed', system)
            raise CommandError(f'execution error: {exc}', returncode=EXECUTION_ERROR)
        except Exception as exc:
            logger.exception('experiment on %s crashed', system)
            raise CommandError(f'execution error: {type(exc).__name__}: {exc}', returncode=EXECUTION_ERROR)

        self.stdout.write(experiments.system_summary(system))
        for outcome in outcomes:
            mark = self.style.SUCCESS('ok') if not outcome.failed else self.style.ERROR('FAILED')
            self.stdout.write(f'  [{outcome.index}] {outcome.check:<20} {outcome.status:<24} {mark}')
        self.stdout.write(f'{len(outcomes)} checks written to {output["path"]}')

        failed = [outcome for outcome in outcomes if outcome.failed]
        if failed:
            raise CommandError(f'{len(failed)} checks failed', returncode=ASSERTION_FAILED)
