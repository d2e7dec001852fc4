import numpy as np

from ...services.exporters import write_csv, write_json
from ...services.lorenz_stenflo import shoot_scan
from ..base import HomoclinicCommand

COLUMNS = ['r', 'sign', 'closest_distance', 'closest_time', 'exit_time', 'crossings']


class Command(HomoclinicCommand):
    help = 'Стрельба вдоль неустойчивого многообразия нуля системы Лоренца-Стенфло на сетке по r'
    option_defaults = {
        'r_min': None, 'r_max': None, 'r_points': 1,
        'delta': 1e-6, 't_max': 20.0, 'exit_radius': 0.1,
    }

    def add_command_arguments(self, parser):
        parser.add_argument('--r-min', type=float, dest='r_min')
        parser.add_argument('--r-max', type=float, dest='r_max')
        parser.add_argument('--r-points', type=int, dest='r_points')
        parser.add_argument('--delta', type=float)
        parser.add_argument('--t-max', type=float, dest='t_max')
        parser.add_argument('--exit-radius', type=float, dest='exit_radius')

    def run_command(self, config):
        params = self.ls_params
        options = config['options']
        r_min = params.r if options['r_min'] is None else options['r_min']
        r_max = r_min if options['r_max'] is None else options['r_max']
        r_values = np.linspace(r_min, r_max, int(options['r_points']))
        results = shoot_scan(
            params, r_values, self.workers,
            delta=options['delta'], t_max=options['t_max'], exit_radius=options['exit_radius'],
            rel_tol=config['ls_rtol'], abs_tol=config['ls_atol'],
        )

        rows, payload = [], []
        for r, shots in results:
            for shot in shots:
                rows.append({
                    'r': r, 'sign': shot.sign, 'closest_distance': shot.closest_distance,
                    'closest_time': shot.closest_time, 'exit_time': shot.exit_time,
                    'crossings': len(shot.crossings),
                })
                payload.append({
                    'r': r, 'sign': shot.sign, 'closest_distance': shot.closest_distance,
                    'crossings': [{'t': t, 'state': state} for t, state in shot.crossings],
                })
        return [
            write_csv(self.output_name('.csv'), rows, columns=COLUMNS),
            write_json(self.output_name('.json'), payload),
        ]
