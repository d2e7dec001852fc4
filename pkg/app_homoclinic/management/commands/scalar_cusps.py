from ...services.exporters import scalar_point_record, scalar_point_residual, write_csv, write_json
from ...services.scalar_bifurcations import scan_cusps
from ..base import HomoclinicCommand


class Command(HomoclinicCommand):
    help = 'Точки сборки LP-рогов скалярного отображения для диапазона n'

    def run_command(self, config):
        cusps = scan_cusps(self.n_values(), self.model_params, self.workers, config['newton_tol'])
        rows = [
            {'n': cusp.n, 'mu1': cusp.mu.mu1, 'mu2': cusp.mu.mu2, 'residual': scalar_point_residual(cusp)}
            for cusp in cusps
        ]
        return [
            write_csv(self.output_name('.csv'), rows, columns=['n', 'mu1', 'mu2', 'residual']),
            write_json(self.output_name('.json'), [scalar_point_record(cusp) for cusp in cusps]),
        ]
