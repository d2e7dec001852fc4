import logging

from ...exceptions import NotFoundError
from ...services.asymptotics import (
    compare_table, cusp_asymptotic, mu1_axis_intersection, turning_asymptotic,
)
from ...services.exporters import write_csv
from ...services.model_maps import Mu
from ...services.parallel import ordered_map
from ...services.scalar_bifurcations import find_cusp, horn_axis_crossings, trace_lp_horn
from ...services.secondary_homoclinic import find_turning
from ..base import HomoclinicCommand

logger = logging.getLogger(__name__)

COLUMNS = ['index', 'exact_mu1', 'exact_mu2', 'asymptotic_mu1', 'asymptotic_mu2', 'rel_error']


class Command(HomoclinicCommand):
    help = 'Сравнение точных и асимптотических сборок, пересечений с осью μ2 = 0 или точек поворота'
    option_defaults = {'kind': 'cusp'}

    def add_command_arguments(self, parser):
        parser.add_argument('--kind', choices=['cusp', 'axis', 'turning'])

    def exact_axis(self, n):
        config, p = self.config, self.model_params
        branches = trace_lp_horn(n, p, self.step_control, config['mu1_max'], config['theta_half_width'],
                                 config['max_points'], config['newton_tol'])
        crossings = horn_axis_crossings(branches, p, config['newton_tol'])
        if not crossings:
            raise NotFoundError('Рог не пересекает ось μ2 = 0', n=n)
        target = mu1_axis_intersection(n, p)
        closest = min(crossings, key=lambda point: abs(point.mu.mu1 - target))
        return Mu(closest.mu.mu1, 0.0)

    def run_command(self, config):
        p = self.model_params
        kind = config['options']['kind']
        tol = config['newton_tol']
        if kind == 'cusp':
            indices = self.n_values()
            exact = ordered_map(lambda n: find_cusp(n, p, tol).mu, indices, self.workers)
            asymptotic = [cusp_asymptotic(n, p) for n in indices]
        elif kind == 'axis':
            indices = self.n_values()
            exact = ordered_map(self.exact_axis, indices, self.workers)
            asymptotic = [Mu(mu1_axis_intersection(n, p), 0.0) for n in indices]
        else:
            indices = self.m_values()
            exact = ordered_map(lambda m: find_turning(m, p, tol, config['newton_max_iter']).mu,
                                indices, self.workers)
            asymptotic = [turning_asymptotic(m, p) for m in indices]

        table = compare_table(exact, asymptotic)
        rows = [
            {'index': index, 'exact_mu1': item.mu1, 'exact_mu2': item.mu2,
             'asymptotic_mu1': guess.mu1, 'asymptotic_mu2': guess.mu2, 'rel_error': error}
            for index, item, guess, error in zip(indices, exact, asymptotic, table.errors)
        ]
        trailer = [
            f'kind={kind}',
            f'spearman={table.spearman:.17g}',
            f'verdict={"decreasing" if table.decreasing else "not_decreasing"}',
        ]
        logger.info('Сравнение %s: %s', kind, trailer[-1])
        return [write_csv(self.output_name(f'.{kind}.csv'), rows, columns=COLUMNS, trailer=trailer)]
