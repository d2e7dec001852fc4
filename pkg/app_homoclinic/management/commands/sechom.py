import math

from ...services.exporters import parabola_curve_rows, sechom_point_record, write_csv, write_json
from ...services.parallel import ordered_map
from ...services.secondary_homoclinic import find_turning, trace_parabola
from ..base import HomoclinicCommand


class Command(HomoclinicCommand):
    help = 'Параболы вторичных гомоклиник и их точки поворота для диапазона m'

    def run_command(self, config):
        p = self.model_params

        def trace(m):
            halves = trace_parabola(m, p, self.step_control, config['mu1_max'], config['max_points'],
                                    config['newton_tol'])
            return m, halves, find_turning(m, p, config['newton_tol'], config['newton_max_iter'])

        rows, turning_points = [], []
        for m, halves, turning in ordered_map(trace, self.m_values(), self.workers):
            for half in halves:
                rows += parabola_curve_rows(half, p, f'SECHOM_m{m}')
            turning_points.append(turning)

        trailer = [f'expected_mu2_ratio={math.exp(-2.0 * math.pi * p.beta):.17g}']
        for previous, current in zip(turning_points, turning_points[1:]):
            trailer.append(f'm={current.m} mu2_ratio={current.mu.mu2 / previous.mu.mu2:.17g}')
        return [
            write_csv(self.output_name('.csv'), rows, trailer=trailer),
            write_json(self.output_name('.turning.json'), [sechom_point_record(point) for point in turning_points]),
        ]
