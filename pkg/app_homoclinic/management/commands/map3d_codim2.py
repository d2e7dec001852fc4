import logging
from collections import Counter

from ...exceptions import ConvergenceError, InconclusiveError, NotFoundError
from ...services.exporters import codim2_point_record, map3d_curve_rows, write_csv, write_json
from ...services.map3d_bifurcations import classify_horn_3d, detect_codim2_3d, trace_map_curve, trace_ns3
from ...services.parallel import ordered_map
from ..base import HomoclinicCommand

logger = logging.getLogger(__name__)


def _same_point(first, second, rel_tol=1e-6):
    return (abs(first.mu.mu1 - second.mu.mu1) <= rel_tol * max(abs(first.mu.mu1), 1e-12)
            and abs(first.mu.mu2 - second.mu.mu2) <= rel_tol * max(abs(first.mu.mu2), 1e-300))


class Command(HomoclinicCommand):
    help = 'Точки коразмерности 2 на кривых LP3/PD3 и кривые NS3 из точек R1/R2'
    option_defaults = {'ns': True}
    uses_map3d_defaults = True

    def add_command_arguments(self, parser):
        parser.add_argument('--skip-ns', action='store_const', const=False, dest='ns',
                            help='Не продолжать кривые NS3')

    def scan_horn(self, n):
        config, p = self.config, self.model_params
        curves = {
            kind: trace_map_curve(
                kind, n, p, self.step_control, config['theta_half_width'], config['mu1_max'],
                config['max_points'], config['newton_tol'],
            )
            for kind in ('LP3', 'PD3')
        }
        points = [point for curve in curves.values() for point in detect_codim2_3d(curve, p, config['newton_tol'])]
        try:
            verdict, _ = classify_horn_3d(n, p, curves['PD3'], tol=config['newton_tol'])
        except InconclusiveError as exc:
            logger.warning('Тип рога 3D n=%d не определён: %s', n, exc)
            verdict = 'inconclusive'

        ns_results = []
        if config['options']['ns']:
            covered = []
            for seed in (point for point in points if point.kind in ('R1', 'R2')):
                if any(_same_point(seed, end) for end in covered):
                    continue
                try:
                    result = trace_ns3(seed, p, tol=config['newton_tol'])
                except (ConvergenceError, NotFoundError) as exc:
                    logger.warning('NS3 из %s n=%d не построена: %s', seed.kind, n, exc)
                    continue
                covered += result.endpoints
                ns_results.append(result)
        return n, curves, points, verdict, ns_results

    def run_command(self, config):
        p = self.model_params
        rows, records, trailer = [], [], []
        counts = Counter()
        for n, curves, points, verdict, ns_results in ordered_map(self.scan_horn, self.n_values(), self.workers):
            for kind, curve in curves.items():
                rows += map3d_curve_rows(curve, p, f'{kind}_n{n}')
            for index, result in enumerate(ns_results):
                rows += map3d_curve_rows(result.curve, p, f'NS3_n{n}_{index}')
                points = points + result.resonances
                trailer.append(f'NS3 n={n} from={result.endpoints[0].kind} '
                               f'to={result.endpoints[-1].kind if len(result.endpoints) > 1 else "open"} '
                               f'points={len(result.curve)} modulus_violations={result.modulus_violations}')
            records += [codim2_point_record(point) for point in points]
            counts.update(point.kind for point in points)
            trailer.append(f'n={n} verdict_3d={verdict}')

        trailer.append('counts ' + ' '.join(f'{kind}={counts[kind]}' for kind in sorted(counts)))
        return [
            write_csv(self.output_name('.csv'), rows, trailer=trailer),
            write_json(self.output_name('.points.json'), records),
        ]
