from unittest import mock

from django.contrib.auth.models import User
from django.core.cache import cache
from django.test import TestCase, override_settings
from django.urls import reverse
from rest_framework.test import APIClient

from lowrank import solvers
from lowrank.exceptions import NumericalFailure
from lowrank.experiments import ExperimentRow, ExperimentSpec, InstanceSource, Method
from lowrank.models import ExperimentRun

MATRIX = [[3.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 1.0]]


def store_run(label=''):
    rows = [
        ExperimentRow(Method.L1, 1, 0, 1.0, 0.5, 100, 2 ** 63),
        ExperimentRow(Method.L1, 1, 1, 3.0, 0.7, 100, 5),
        ExperimentRow(Method.SVD, 1, 0, 2.0, 0.01, 0, 2 ** 63),
    ]
    spec = ExperimentSpec(InstanceSource('uniform', 4, 4), ranks=[1], trials=2)
    return ExperimentRun.objects.record(spec, rows, label=label)


class RunEndpointTests(TestCase):
    def setUp(self):
        cache.clear()
        self.client = APIClient()
        self.run = store_run('first')

    def test_list(self):
        response = self.client.get(reverse('lowrank:run_list'))
        self.assertEqual(response.status_code, 200)
        self.assertTrue(response.data['success'])
        (entry,) = response.data['data']
        self.assertEqual(entry['label'], 'first')
        self.assertEqual(entry['record_count'], 3)

    def test_list_limit(self):
        store_run('second')
        response = self.client.get(reverse('lowrank:run_list'), {'limit': 1})
        self.assertEqual([entry['label'] for entry in response.data['data']], ['second'])
        response = self.client.get(reverse('lowrank:run_list'), {'limit': 'many'})
        self.assertEqual(response.status_code, 400)

    def test_detail(self):
        response = self.client.get(reverse('lowrank:run_detail', args=[self.run.pk]))
        self.assertEqual(response.status_code, 200)
        data = response.data['data']
        self.assertEqual(len(data['records']), 3)
        self.assertEqual(data['records'][0]['seed'], str(2 ** 63))
        self.assertEqual(data['spec']['source']['kind'], 'uniform')

    def test_missing_run(self):
        for name in ('run_detail', 'run_summary', 'run_plotdata'):
            with self.subTest(name=name):
                response = self.client.get(reverse(f'lowrank:{name}', args=[self.run.pk + 100]))
                self.assertEqual(response.status_code, 404)
                self.assertEqual(response.data, {'success': False, 'error': 'Run not found'})

    def test_summary(self):
        response = self.client.get(reverse('lowrank:run_summary', args=[self.run.pk]))
        self.assertEqual(response.status_code, 200)
        l1, svd = response.data['data']
        self.assertEqual((l1['method'], l1['count'], l1['error_median']), ('l1', 2, 2.0))
        self.assertEqual(svd['error_min'], 2.0)

    def test_plotdata(self):
        response = self.client.get(reverse('lowrank:run_plotdata', args=[self.run.pk]))
        data = response.data['data']
        self.assertEqual(data['methods'], ['l1', 'svd'])
        self.assertEqual(data['series']['l1'], [{'rank': 1, 'median_error': 2.0}])


class SolveEndpointTests(TestCase):
    def setUp(self):
        cache.clear()
        self.client = APIClient()
        self.user = User.objects.create_user('analyst', password='not-a-real-password')
        self.url = reverse('lowrank:solve')

    def login(self):
        self.client.force_authenticate(self.user)

    def test_requires_authentication(self):
        response = self.client.post(self.url, {'matrix': MATRIX, 'rank': 1}, format='json')
        self.assertEqual(response.status_code, 403)

    def test_solves_small_matrix(self):
        self.login()
        response = self.client.post(self.url, {
            'matrix': MATRIX, 'rank': 2, 'p': '1', 'iterations': 50, 'trace_every': 10,
        }, format='json')
        self.assertEqual(response.status_code, 200)
        data = response.data['data']
        self.assertEqual(data['norm'], '1')
        self.assertEqual(data['iterations_run'], 50)
        self.assertEqual(len(data['U']), 3)
        self.assertEqual(len(data['V'][0]), 2)
        self.assertEqual(data['objective_trace'][-1]['iteration'], 50)
        self.assertLessEqual(data['final_error'], 1.01)

    def test_linf(self):
        self.login()
        response = self.client.post(self.url, {'matrix': MATRIX, 'rank': 1, 'p': 'inf', 'iterations': 10},
                                    format='json')
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response.data['data']['norm'], 'inf')

    def test_validation_errors(self):
        self.login()
        cases = [
            {'matrix': MATRIX, 'rank': 4},
            {'matrix': [[1.0, 2.0], [3.0]], 'rank': 1},
            {'matrix': MATRIX, 'rank': 1, 'p': '2'},
            {'matrix': MATRIX, 'rank': 1, 'tau': 0},
            {'matrix': MATRIX, 'rank': 1, 'opt': 1.0},
            {'matrix': MATRIX, 'rank': 1, 'iterations': 10 ** 7},
        ]
        for body in cases:
            with self.subTest(body=body):
                response = self.client.post(self.url, body, format='json')
                self.assertEqual(response.status_code, 400)
                self.assertFalse(response.data['success'])

    @override_settings(LOWRANK={'API_MAX_CELLS': 4, 'API_MAX_ITERATIONS': 100})
    def test_size_guard(self):
        self.login()
        response = self.client.post(self.url, {'matrix': MATRIX, 'rank': 1}, format='json')
        self.assertEqual(response.status_code, 400)
        self.assertIn('matrix', response.data['errors'])

    def test_numerical_failure(self):
        self.login()
        with mock.patch('lowrank.views.solve', side_effect=NumericalFailure('objective became non-finite')):
            response = self.client.post(self.url, {'matrix': MATRIX, 'rank': 1, 'iterations': 1}, format='json')
        self.assertEqual(response.status_code, 422)
        self.assertEqual(response.data['error'], 'objective became non-finite')

    def test_rate_limit(self):
        self.login()
        body = {'matrix': MATRIX, 'rank': 1, 'iterations': 1}
        statuses = [self.client.post(self.url, body, format='json').status_code for _ in range(11)]
        self.assertEqual(statuses[:10], [200] * 10)
        self.assertEqual(statuses[10], 429)

    def test_rate_limit_is_per_user(self):
        other = User.objects.create_user('second', password='not-a-real-password')
        body = {'matrix': MATRIX, 'rank': 1, 'iterations': 1}
        self.login()
        for _ in range(10):
            self.client.post(self.url, body, format='json')
        self.assertEqual(self.client.post(self.url, body, format='json').status_code, 429)
        self.client.force_authenticate(other)
        self.assertEqual(self.client.post(self.url, body, format='json').status_code, 200)

    def test_rate_limit_counter_and_expiry(self):
        self.login()
        body = {'matrix': MATRIX, 'rank': 1, 'iterations': 1}
        for _ in range(3):
            self.client.post(self.url, body, format='json')
        self.assertEqual(cache.get(f'rate_limit:solve:user:{self.user.pk}'), 3)
        for _ in range(8):
            self.client.post(self.url, body, format='json')
        with self.assertLogs('lowrank.views', level='WARNING'):
            self.assertEqual(self.client.post(self.url, body, format='json').status_code, 429)
        # the window closes when the counter expires
        cache.delete(f'rate_limit:solve:user:{self.user.pk}')
        self.assertEqual(self.client.post(self.url, body, format='json').status_code, 200)

    def test_step_search_option(self):
        self.login()
        body = {'matrix': MATRIX, 'rank': 1, 'p': 'inf', 'iterations': 5, 'step_search': 'fixed'}
        with mock.patch('lowrank.views.solve', wraps=solvers.solve) as solve:
            response = self.client.post(self.url, body, format='json')
        self.assertEqual(response.status_code, 200)
        self.assertEqual(solve.call_args.kwargs['step_search'], 'fixed')
        body['step_search'] = 'newton'
        self.assertEqual(self.client.post(self.url, body, format='json').status_code, 400)
