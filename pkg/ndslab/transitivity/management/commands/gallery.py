import logging
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from transitivity.exceptions import DynamicsError
from transitivity.services import gallery, reports

logger = logging.getLogger(__name__)

ASSERTION_FAILED = 1
SCHEMA_VIOLATION = 2
EXECUTION_ERROR = 3


def parse_params(pairs):
    params = {}
    for pair in pairs or []:
        key, sep, value = pair.partition('=')
        if not sep or not key:
            raise CommandError(f'parameters are written key=value, got {pair!r}', returncode=SCHEMA_VIOLATION)
        params[key.strip()] = value.strip()
    return params


class Command(BaseCommand):
    help = 'List the example gallery, run one entry or run every entry.'

    def add_arguments(self, parser):
        sub = parser.add_subparsers(dest='verb', required=True)
        sub.add_parser('list', help='List entries with their default parameters.')
        run = sub.add_parser('run', help='Run the assertions of one entry.')
        run.add_argument('entry')
        run.add_argument('--param', action='append', default=[], help='Override a parameter, key=value.')
        run.add_argument('--output', help='Write the entry report as JSON lines.')
        run_all = sub.add_parser('run-all', help='Run every entry at its default parameters.')
        run_all.add_argument('--output', help='Write one JSON line per entry.')

    def handle(self, *args, **options):
        verb = options['verb']
        if verb == 'list':
            for entry in gallery.ENTRIES.values():
                params = ', '.join(f'{key}={reports.to_record(value)}' for key, value in entry.defaults.items())
                self.stdout.write(f'{entry.id:<40} {entry.title} ({params})')
            return

        try:
            if verb == 'run':
                results = [gallery.run(options['entry'], parse_params(options['param']))]
            else:
                results = gallery.run_all().entries
        except DynamicsError as exc:
            raise CommandError(str(exc), returncode=SCHEMA_VIOLATION)
        except Exception as exc:
            logger.exception('gallery %s crashed', verb)
            raise CommandError(f'execution error: {type(exc).__name__}: {exc}', returncode=EXECUTION_ERROR)

        for result in results:
            self._print(result)
        if options.get('output'):
            reports.write_jsonl(Path(options['output']), [reports.to_record(result) for result in results])

        if any(result.error for result in results) and verb == 'run':
            raise CommandError(results[0].error, returncode=SCHEMA_VIOLATION)
        failures = sum(1 for result in results for item in result.results if not item.passed) + sum(
            1 for result in results if result.error)
        if failures:
            raise CommandError(f'{failures} gallery assertions failed', returncode=ASSERTION_FAILED)

    def _print(self, result):
        status = self.style.SUCCESS('pass') if result.passed else self.style.ERROR('FAIL')
        self.stdout.write(f'{result.id}: {status}')
        if result.error:
            self.stdout.write(f'  error: {result.error}')
        for item in result.results:
            mark = 'ok' if item.passed else 'FAILED'
            self.stdout.write(f'  {mark:<6} {item.description} [{item.provenance}]')
            if not item.passed:
                self.stdout.write(f'         expected {reports.to_record(item.expected)}, got {reports.to_record(item.actual)}')
        for note in result.notes:
            self.stdout.write(f'  note: {note}')
