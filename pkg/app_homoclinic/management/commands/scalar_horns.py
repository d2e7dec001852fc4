from ...services.exporters import (
    scalar_curve_rows, scalar_point_record, write_csv, write_json,
)
from ...services.parallel import ordered_map
from ...services.scalar_bifurcations import horn_axis_crossings, trace_lp_horn, trace_pd_curve
from ..base import HomoclinicCommand


class Command(HomoclinicCommand):
    help = 'LP-рога (две ветви до сборки) и PD-кривые скалярного отображения для диапазона n'
    option_defaults = {'with_pd': True}

    def add_command_arguments(self, parser):
        parser.add_argument('--skip-pd', action='store_const', const=False, dest='with_pd',
                            help='Не строить PD-кривые')

    def run_command(self, config):
        p = self.model_params
        trace_options = {
            'step_ctrl': self.step_control,
            'mu1_max': config['mu1_max'],
            'theta_half_width': config['theta_half_width'],
            'max_points': config['max_points'],
            'tol': config['newton_tol'],
        }
        with_pd = config['options']['with_pd']

        def trace(n):
            branches = trace_lp_horn(n, p, **trace_options)
            pd_curve = trace_pd_curve(n, p, **trace_options) if with_pd else None
            return n, branches, pd_curve

        rows, points, trailer = [], [], []
        for n, branches, pd_curve in ordered_map(trace, self.n_values(), self.workers):
            for curve in branches:
                rows += scalar_curve_rows(curve, p, f'LP_n{n}')
                trailer.append(f'LP n={n} branch={curve.metadata["branch"]} points={len(curve)} '
                               f'termination={curve.metadata["termination_start"]}/{curve.termination}')
            points += [scalar_point_record(point) for point in horn_axis_crossings(branches, p, config['newton_tol'])]
            if pd_curve is not None:
                rows += scalar_curve_rows(pd_curve, p, f'PD_n{n}')
                trailer.append(f'PD n={n} points={len(pd_curve)} '
                               f'termination={pd_curve.metadata["termination_start"]}/{pd_curve.termination}')

        return [
            write_csv(self.output_name('.csv'), rows, trailer=trailer),
            write_json(self.output_name('.points.json'), points),
        ]
