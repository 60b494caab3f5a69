"""
Views for the low-rank approximation API.
"""
import logging
from functools import wraps

import numpy as np
from django.conf import settings
from django.core.cache import cache
from django.db.models import Count
from rest_framework import status
from rest_framework.decorators import api_view, permission_classes
from rest_framework.permissions import AllowAny, IsAuthenticated
from rest_framework.response import Response

from .exceptions import ArgumentError, NumericalFailure
from .experiments import plot_series
from .models import ExperimentRun
from .serializers import (
    ExperimentRunDetailSerializer,
    ExperimentRunSerializer,
    SolveRequestSerializer,
    SummaryRowSerializer,
)
from .solvers import solve

logger = logging.getLogger(__name__)

RUNS_CACHE_SECONDS = 30


def _client_key(request):
    if request.user.is_authenticated:
        return f"user:{request.user.pk}"
    forwarded = request.META.get('HTTP_X_FORWARDED_FOR', '')
    return f"addr:{forwarded.split(',')[0].strip() or request.META.get('REMOTE_ADDR', 'unknown')}"


def rate_limit(key_prefix, max_requests=10, window_seconds=60):
    """
    Fixed-window limit of max_requests per client within window_seconds.

    The window counter lives in the cache: `cache.add` opens the window with
    its expiry and `cache.incr` counts atomically, so concurrent requests
    cannot both read the same count.
    """
    def decorator(view_func):
        @wraps(view_func)
        def wrapped_view(request, *args, **kwargs):
            cache_key = f"rate_limit:{key_prefix}:{_client_key(request)}"
            cache.add(cache_key, 0, window_seconds)
            try:
                count = cache.incr(cache_key)
            except ValueError:
                # expired between add and incr
                cache.set(cache_key, 1, window_seconds)
                count = 1
            if count > max_requests:
                logger.warning("rate limit hit for %s", cache_key)
                return Response({
                    'success': False,
                    'error': f'Rate limit of {max_requests} requests per {window_seconds}s exceeded.'
                }, status=status.HTTP_429_TOO_MANY_REQUESTS)
            return view_func(request, *args, **kwargs)
        return wrapped_view
    return decorator


def _run_not_found():
    return Response({
        'success': False,
        'error': 'Run not found'
    }, status=status.HTTP_404_NOT_FOUND)


def _trace(pairs):
    return [{'iteration': iteration, 'value': value} for iteration, value in pairs]


@api_view(['GET'])
@permission_classes([AllowAny])
def run_list(request):
    """
    Newest stored experiment runs.
    Cached for 30 seconds.
    """
    try:
        limit = int(request.GET.get('limit', 50))
    except ValueError:
        return Response({
            'success': False,
            'error': 'limit must be an integer'
        }, status=status.HTTP_400_BAD_REQUEST)
    limit = max(1, min(limit, 100))

    cache_key = f"runs:{limit}"
    cached_data = cache.get(cache_key)
    if cached_data is not None:
        return Response({
            'success': True,
            'data': cached_data
        }, status=status.HTTP_200_OK)

    runs = ExperimentRun.objects.annotate(record_count=Count('records'))[:limit]
    data = ExperimentRunSerializer(runs, many=True).data
    cache.set(cache_key, data, RUNS_CACHE_SECONDS)

    return Response({
        'success': True,
        'data': data
    }, status=status.HTTP_200_OK)


@api_view(['GET'])
@permission_classes([AllowAny])
def run_detail(request, run_id):
    """
    One run with all of its records.
    """
    run = ExperimentRun.objects.prefetch_related('records').filter(pk=run_id).first()
    if run is None:
        return _run_not_found()
    return Response({
        'success': True,
        'data': ExperimentRunDetailSerializer(run).data
    }, status=status.HTTP_200_OK)


@api_view(['GET'])
@permission_classes([AllowAny])
def run_summary(request, run_id):
    """
    [min, mean, median] of error and wall time per (method, rank).
    Cached for 30 seconds.
    """
    cache_key = f"runs:{run_id}:summary"
    cached_data = cache.get(cache_key)
    if cached_data is None:
        run = ExperimentRun.objects.filter(pk=run_id).first()
        if run is None:
            return _run_not_found()
        cached_data = SummaryRowSerializer(run.summary(), many=True).data
        cache.set(cache_key, cached_data, RUNS_CACHE_SECONDS)
    return Response({
        'success': True,
        'data': cached_data
    }, status=status.HTTP_200_OK)


@api_view(['GET'])
@permission_classes([AllowAny])
def run_plotdata(request, run_id):
    """
    Median error per rank, one series per method.
    """
    run = ExperimentRun.objects.filter(pk=run_id).first()
    if run is None:
        return _run_not_found()
    methods, series = plot_series(run.rows())
    data = {
        'methods': [method.value for method in methods],
        'series': {
            method.value: [
                {'rank': rank, 'median_error': medians.get(method)}
                for rank, medians in series
            ]
            for method in methods
        },
    }
    return Response({
        'success': True,
        'data': data
    }, status=status.HTTP_200_OK)


@api_view(['POST'])
@permission_classes([IsAuthenticated])
@rate_limit('solve', max_requests=10, window_seconds=60)
def solve_matrix(request):
    """
    Solve one small instance synchronously.
    Requires authentication.
    Rate limited to 10 requests per minute.
    """
    limits = settings.LOWRANK
    serializer = SolveRequestSerializer(data=request.data, context={
        'max_cells': limits['API_MAX_CELLS'],
        'max_iterations': limits['API_MAX_ITERATIONS'],
    })
    if not serializer.is_valid():
        return Response({
            'success': False,
            'errors': serializer.errors
        }, status=status.HTTP_400_BAD_REQUEST)

    data = serializer.validated_data
    try:
        report = solve(
            np.array(data['matrix'], dtype=np.float64),
            data['rank'],
            data['p'],
            serializer.mode(iteration_cap=limits['API_MAX_ITERATIONS']),
            **serializer.solver_options(),
        )
    except ArgumentError as e:
        return Response({
            'success': False,
            'error': str(e)
        }, status=status.HTTP_400_BAD_REQUEST)
    except NumericalFailure as e:
        logger.warning("solve request failed: %s", e)
        return Response({
            'success': False,
            'error': str(e)
        }, status=status.HTTP_422_UNPROCESSABLE_ENTITY)

    return Response({
        'success': True,
        'data': {
            'final_error': report.final_error,
            'norm': 'inf' if report.kind.target_norm == float('inf') else '1',
            'termination': report.termination.value,
            'iterations_run': report.iterations_run,
            'wall_time': report.wall_time,
            'U': report.factors.U.tolist(),
            'V': report.factors.V.tolist(),
            'objective_trace': _trace(report.objective_trace),
            'error_trace': _trace(report.error_trace),
        }
    }, status=status.HTTP_200_OK)
