import logging
import unittest

from src.core.exceptions import ConfigurationError, NumericalError
from src.utils import log_exception, logger, set_level
from src.utils.logger import LOGGER_NAME


class TestLogException(unittest.TestCase):

    def test_numerical_failure_reports_achieved_and_exit_code(self):
        with self.assertLogs(LOGGER_NAME, level='ERROR') as captured:
            log_exception(logger, NumericalError('quadrature stalled', achieved=1e-3))
        self.assertEqual(len(captured.records), 1)
        message = captured.records[0].getMessage()
        self.assertIn('NumericalError: quadrature stalled', message)
        self.assertIn('(achieved 0.001)', message)
        self.assertIn('[exit 3]', message)

    def test_configuration_failure_has_exit_code_only(self):
        with self.assertLogs(LOGGER_NAME, level='ERROR') as captured:
            log_exception(logger, ConfigurationError('eps out of range'))
        message = captured.records[0].getMessage()
        self.assertIn('[exit 2]', message)
        self.assertNotIn('achieved', message)

    def test_foreign_exception_is_plain(self):
        with self.assertLogs(LOGGER_NAME, level='ERROR') as captured:
            log_exception(logger, ValueError('bad'))
        self.assertEqual(captured.records[0].getMessage(), 'ValueError: bad')


class TestSetLevel(unittest.TestCase):

    def setUp(self):
        self.saved = [(handler, handler.level) for handler in logger.handlers]

    def tearDown(self):
        for handler, level in self.saved:
            handler.setLevel(level)

    def test_console_follows_file_stays_debug(self):
        set_level('WARNING')
        for handler in logger.handlers:
            if isinstance(handler, logging.FileHandler):
                self.assertEqual(handler.level, logging.DEBUG)
            else:
                self.assertEqual(handler.level, logging.WARNING)
        self.assertEqual(logger.level, logging.DEBUG)

    def test_unknown_level_falls_back_to_info(self):
        set_level('CHATTY')
        consoles = [h for h in logger.handlers if not isinstance(h, logging.FileHandler)]
        for handler in consoles:
            self.assertEqual(handler.level, logging.INFO)


if __name__ == '__main__':
    unittest.main()
