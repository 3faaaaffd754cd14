from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from transitivity.exceptions import DynamicsError
from transitivity.services import reports

MISSING_SERIES = 1
SCHEMA_VIOLATION = 2


class Command(BaseCommand):
    help = 'Flatten a trace, coverage or pair-matrix series of a JSON-lines report into CSV.'

    def add_arguments(self, parser):
        parser.add_argument('report', help='Path to a JSON-lines report written by `run`.')
        parser.add_argument('--kind', required=True, choices=reports.PLOT_KINDS)
        parser.add_argument('--index', type=int, help='Only the record with this check index.')
        parser.add_argument('--output', help='CSV destination; defaults to <report>.<kind>.csv.')

    def handle(self, *args, **options):
        path, kind = Path(options['report']), options['kind']
        try:
            records = reports.read_jsonl(path)
        except DynamicsError as exc:
            raise CommandError(str(exc), returncode=SCHEMA_VIOLATION)
        if options['index'] is not None:
            records = [record for record in records if record.get('index') == options['index']]

        header, rows = None, []
        for record in records:
            series = reports.plot_rows(record, kind)
            if series is None:
                continue
            if header is None:
                header = ['index', *series[0]] if len(records) > 1 else series[0]
            rows.extend([record.get('index'), *row] if len(records) > 1 else row for row in series[1])
        if header is None:
            raise CommandError(f'no {kind} series in {path}', returncode=MISSING_SERIES)

        destination = Path(options['output'] or f'{path}.{kind}.csv')
        reports.write_csv(destination, header, rows)
        self.stdout.write(f'{len(rows)} rows written to {destination}')
