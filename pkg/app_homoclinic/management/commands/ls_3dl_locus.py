import numpy as np

from ...services.exporters import write_csv
from ...services.lorenz_stenflo import find_3dl_locus
from ..base import HomoclinicCommand


class Command(HomoclinicCommand):
    help = 'Кривая 3DL-перехода Re(λc) = -b системы Лоренца-Стенфло на плоскости (r, b)'
    option_defaults = {'free': 'b', 'grid_min': 10.0, 'grid_max': 20.0, 'grid_points': 101}

    def add_command_arguments(self, parser):
        parser.add_argument('--free', choices=['b', 'r'], help='Параметр, находимый на каждом узле сетки')
        parser.add_argument('--grid-min', type=float, dest='grid_min')
        parser.add_argument('--grid-max', type=float, dest='grid_max')
        parser.add_argument('--grid-points', type=int, dest='grid_points')

    def run_command(self, config):
        options = config['options']
        grid = np.linspace(options['grid_min'], options['grid_max'], int(options['grid_points']))
        locus = find_3dl_locus(self.ls_params, options['free'], grid)
        rows = [{'r': point.r, 'b': point.b, 'residual': point.residual} for point in locus.points]
        worst = max((point.residual for point in locus.points), default=float('nan'))
        trailer = [
            f'free={locus.free}',
            f'points={len(locus.points)}',
            f'truncated={str(locus.truncated).lower()}',
            f'max_residual={worst:.17g}',
        ]
        return [write_csv(self.output_name('.csv'), rows, columns=['r', 'b', 'residual'], trailer=trailer)]
