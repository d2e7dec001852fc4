from ...services.exporters import scalar_point_record, write_csv, write_json
from ...services.parallel import ordered_map
from ...services.scalar_bifurcations import classify_horn, trace_pd_curve
from ..base import HomoclinicCommand


class Command(HomoclinicCommand):
    help = 'Точки GPD и тип рога (spring/saddle) скалярного отображения для диапазона n'
    option_defaults = {'samples': 400}

    def add_command_arguments(self, parser):
        parser.add_argument('--samples', type=int, help='Точек сетки по θ с каждой стороны от сборки')

    def run_command(self, config):
        p = self.model_params
        samples = config['options']['samples']

        def classify(n):
            pd_curve = trace_pd_curve(
                n, p, self.step_control, config['mu1_max'], config['theta_half_width'],
                config['max_points'], config['newton_tol'],
            )
            return classify_horn(n, p, pd_curve, samples, config['newton_tol'])

        results = ordered_map(classify, self.n_values(), self.workers)
        rows = [
            {'n': item.n, 'verdict': item.verdict, 'gpd_count': len(item.gpd_points),
             'self_intersects': item.self_intersects}
            for item in results
        ]
        points = [scalar_point_record(point) for item in results for point in item.gpd_points]
        trailer = [f'n={item.n} verdict={item.verdict}' for item in results]
        return [
            write_csv(self.output_name('.csv'), rows, columns=['n', 'verdict', 'gpd_count', 'self_intersects'],
                      trailer=trailer),
            write_json(self.output_name('.points.json'), points),
        ]
