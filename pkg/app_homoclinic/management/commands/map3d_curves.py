from django.core.management.base import CommandError

from ...services.exporters import map3d_curve_rows, write_csv
from ...services.map3d_bifurcations import trace_map_curve
from ...services.parallel import ordered_map
from ..base import HomoclinicCommand

KINDS = ('LP3', 'PD3')


def parse_kinds(value):
    kinds = [item.strip().upper() for item in value.split(',') if item.strip()]
    if not kinds or set(kinds) - set(KINDS):
        raise CommandError(f'Типы кривых задаются из {", ".join(KINDS)}: {value!r}', returncode=1)
    return kinds


class Command(HomoclinicCommand):
    help = 'Кривые LP3 и PD3 трёхмерного отображения для диапазона n'
    option_defaults = {'kinds': list(KINDS)}
    uses_map3d_defaults = True

    def add_command_arguments(self, parser):
        parser.add_argument('--kinds', type=parse_kinds, help='Например LP3,PD3')

    def run_command(self, config):
        p = self.model_params
        jobs = [(kind, n) for n in self.n_values() for kind in config['options']['kinds']]

        def trace(job):
            kind, n = job
            return trace_map_curve(
                kind, n, p, self.step_control, config['theta_half_width'], config['mu1_max'],
                config['max_points'], config['newton_tol'],
            )

        rows, trailer = [], []
        for (kind, n), curve in zip(jobs, ordered_map(trace, jobs, self.workers)):
            rows += map3d_curve_rows(curve, p, f'{kind}_n{n}')
            trailer.append(f'{kind} n={n} points={len(curve)} '
                           f'termination={curve.metadata["termination_start"]}/{curve.termination}')
        return [write_csv(self.output_name('.csv'), rows, trailer=trailer)]
