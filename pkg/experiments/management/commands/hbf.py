import argparse
import sys

from django.core.management.base import BaseCommand

from ...cli import SUBCOMMANDS, run_subcommand


class Command(BaseCommand):
    help = f"Experiment driver: {', '.join(SUBCOMMANDS)}"

    def add_arguments(self, parser):
        parser.add_argument('subcommand', choices=sorted(SUBCOMMANDS))
        parser.add_argument('args', nargs=argparse.REMAINDER)

    def handle(self, *args, **options):
        code = run_subcommand([options['subcommand'], *args], stdout=self.stdout)
        if code:
            sys.exit(code)
