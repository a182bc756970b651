import json
import shutil
import tempfile
import unittest
from pathlib import Path

from src.core.definitions import SUM_RECORD_FIELDS, get_fields
from src.reporting import DataExporter, package_versions


def sample_rows():
    return [
        {'mode': 'continuum', 'd': 2, 'rho': 100.0, 'L': None, 'eps': 0.1, 'M': 4, 'q': 2,
         'quantity': 'fluctuation', 'value': 0.1 + 0.2, 'est_error': 1e-17},
        {'mode': 'continuum', 'd': 2, 'rho': 177.82794100389228, 'L': None, 'eps': 0.1, 'M': 5, 'q': 2,
         'quantity': 'fluctuation', 'value': 2.0 / 3.0, 'est_error': 0.0, 'extra': 'dropped'},
    ]


class TestDataExporter(unittest.TestCase):

    def setUp(self):
        self.base_dir = Path(tempfile.mkdtemp())
        self.exporter = DataExporter(self.base_dir)

    def tearDown(self):
        shutil.rmtree(self.base_dir, ignore_errors=True)

    def test_csv_columns_and_exact_floats(self):
        path = self.exporter.to_csv(sample_rows(), SUM_RECORD_FIELDS, 'fluctuations_d2_continuum.csv')
        lines = path.read_text(encoding='utf-8').splitlines()
        self.assertEqual(lines[0], ','.join(SUM_RECORD_FIELDS))
        # 17 significant digits round-trip 0.1 + 0.2
        self.assertIn('0.30000000000000004', lines[1])
        self.assertNotIn('dropped', path.read_text(encoding='utf-8'))

        df = self.exporter.read_csv('fluctuations_d2_continuum.csv')
        self.assertEqual(list(df.columns), SUM_RECORD_FIELDS)
        self.assertEqual(df['value'].iloc[1], 2.0 / 3.0)
        self.assertEqual(df['rho'].iloc[1], 177.82794100389228)

    def test_csv_is_byte_identical_on_rewrite(self):
        first = self.exporter.to_csv(sample_rows(), SUM_RECORD_FIELDS, 'a.csv').read_bytes()
        second = self.exporter.to_csv(sample_rows(), SUM_RECORD_FIELDS, 'a.csv').read_bytes()
        self.assertEqual(first, second)
        self.assertNotIn(b'\r\n', first)

    def test_read_missing_csv(self):
        self.assertIsNone(self.exporter.read_csv('absent.csv'))

    def test_subfolder(self):
        path = self.exporter.to_csv(sample_rows(), SUM_RECORD_FIELDS, 'b.csv', subfolder='runs')
        self.assertEqual(path.parent, self.base_dir / 'runs')

    def test_manifest(self):
        csv = self.exporter.to_csv(sample_rows(), SUM_RECORD_FIELDS, 'c.csv')
        path = self.exporter.write_manifest('scan', {'dim': 2, 't': (1.0,)}, [csv], 1.5)
        self.assertEqual(path.name, 'manifest_scan.json')
        manifest = json.loads(path.read_text(encoding='utf-8'))
        self.assertEqual(manifest['files'], ['c.csv'])
        self.assertEqual(manifest['config'], {'dim': 2, 't': [1.0]})
        self.assertEqual(set(manifest['versions']), {'python', 'numpy', 'scipy', 'pandas'})

    def test_unserializable_json(self):
        with self.assertRaises(RuntimeError):
            self.exporter.to_json({'x': object()}, 'bad.json')


class TestDefinitions(unittest.TestCase):

    def test_get_fields(self):
        self.assertEqual(get_fields('sum'), SUM_RECORD_FIELDS)
        self.assertEqual(get_fields('claim')[-1], 'verdict')
        with self.assertRaises(ValueError):
            get_fields('activity')

    def test_versions(self):
        self.assertTrue(all(package_versions().values()))


if __name__ == '__main__':
    unittest.main()
