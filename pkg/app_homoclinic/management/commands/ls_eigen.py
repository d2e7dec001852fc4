from ...serializers import MultiplierSerializer
from ...services.exporters import write_json
from ...services.lorenz_stenflo import equilibrium_eigenvalues
from ..base import HomoclinicCommand


class Command(HomoclinicCommand):
    help = 'Спектр тривиального равновесия системы Лоренца-Стенфло, ν0 и σ0'

    def run_command(self, config):
        params = self.ls_params
        data = equilibrium_eigenvalues(params)
        payload = {
            'params': params.to_dict(),
            'eigenvalues': MultiplierSerializer(data.eigenvalues, many=True).data,
            'delta0': data.delta0,
            'omega0': data.omega0,
            'eps0': data.eps0,
            'real_stable': data.real_stable,
            'nu0': data.nu0,
            'sigma0': data.sigma0,
            'wild': data.wild,
            'has_unstable': data.has_unstable,
            'char_residual': data.char_residual,
        }
        return [write_json(self.output_name('.json'), payload)]
