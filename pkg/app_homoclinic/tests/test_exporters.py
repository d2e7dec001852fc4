import math
import shutil
import tempfile

import numpy as np
from django.test import SimpleTestCase, override_settings

from app_homoclinic.services.exporters import (
    CURVE_COLUMNS, clean_json, point_record, read_csv, read_json, read_trailer, write_csv, write_json,
)
from app_homoclinic.services.model_maps import Mu


class ExporterTests(SimpleTestCase):
    def setUp(self):
        root = tempfile.mkdtemp()
        self.addCleanup(shutil.rmtree, root, ignore_errors=True)
        storages = override_settings(STORAGES={
            'default': {
                'BACKEND': 'django.core.files.storage.FileSystemStorage',
                'OPTIONS': {'location': root, 'allow_overwrite': True},
            },
            'staticfiles': {'BACKEND': 'django.contrib.staticfiles.storage.StaticFilesStorage'},
        })
        storages.enable()
        self.addCleanup(storages.disable)

    def test_csv_keeps_full_precision_and_trailer(self):
        rows = [
            {'curve_id': 'LP[n=10]', 'branch': 1, 'step': 0, 'theta': math.pi, 'mu1': 1 / 3, 'mu2': -1.139e-7},
            {'curve_id': 'LP[n=10]', 'branch': 1, 'step': 1, 'theta': math.e, 'mu1': math.nan, 'mu2': 0.0},
        ]
        name = write_csv('curves/lp.csv', rows, trailer=['termination=sign_change:fxx'])
        frame = read_csv(name)
        self.assertEqual(list(frame.columns), CURVE_COLUMNS)
        self.assertEqual(frame['theta'].tolist(), [math.pi, math.e])
        self.assertEqual(frame['mu1'][0], 1 / 3)
        self.assertTrue(math.isnan(frame['mu1'][1]))
        self.assertTrue(frame['x1'].isna().all())
        self.assertEqual(read_trailer(name), ['termination=sign_change:fxx'])

    def test_rewrite_replaces_file(self):
        write_csv('table.csv', [{'n': 1}], columns=['n'])
        name = write_csv('table.csv', [{'n': 2}, {'n': 3}], columns=['n'])
        self.assertEqual(name, 'table.csv')
        self.assertEqual(read_csv(name)['n'].tolist(), [2, 3])

    def test_json_replaces_non_finite_values(self):
        name = write_json('data.json', {'value': math.inf, 'items': (np.float64(0.5), np.int64(3), np.bool_(True))})
        self.assertEqual(read_json(name), {'value': None, 'items': [0.5, 3, True]})

    def test_clean_json(self):
        self.assertEqual(clean_json({1: [math.nan, 2.5]}), {'1': [None, 2.5]})

    def test_point_record(self):
        record = point_record('R1', 5, Mu(0.01, -2e-6), (0.1, 0.2, 3.0, 0.01, -0.4), 1e-12, [1 + 1e-6j, 0.25])
        self.assertEqual(record['kind'], 'R1')
        self.assertEqual(record['n_or_m'], 5)
        self.assertEqual(record['unknowns'], [0.1, 0.2, 3.0, 0.01, -0.4])
        self.assertEqual(record['multipliers'], [{'re': 1.0, 'im': 1e-6}, {'re': 0.25, 'im': 0.0}])
        self.assertIsNone(point_record('CP', 10, Mu(), (6.0,), math.nan)['residual'])
