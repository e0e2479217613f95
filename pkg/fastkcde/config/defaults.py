SYNTHETIC_FAMILIES = ("bimodal_sine", "uniform5d", "decay_series")


def make_det_config_dictionary():
        return {'epsilon': 0.1}


def make_prob_config_dictionary():
        # m, B and z tuned for the timing benchmarks
        return {
                'epsilon': 0.1,
                'm': 25,
                'B': 10,
                'z': 1.5,
                'seed': 0,
                }


def make_search_config_dictionary():
        return {
                'h_max': 10.0,
                'candidates': 300,
                'seed': 0,
                'method': 'probabilistic',
                'leaf_size': 16,
                'n_jobs': 1,
                }


def make_interval_config_dictionary():
        return {'alpha': 0.05, 'n_samples': 5000}


def make_estimator_config_dictionary():
        """Keyword defaults of KCDEstimator other than bandwidth, assembled from the dictionaries above."""
        prob = make_prob_config_dictionary()
        search = make_search_config_dictionary()
        return {
                'method': search['method'],
                'epsilon': prob['epsilon'],
                'm': prob['m'],
                'B': prob['B'],
                'z': prob['z'],
                'h_max': search['h_max'],
                'candidates': search['candidates'],
                'leaf_size': search['leaf_size'],
                'random_state': search['seed'],
                'n_jobs': search['n_jobs'],
                'verbose': 0,
                }


def make_synthetic_config_dictionary(family):
        """Create a dictionary of generator parameters for a synthetic family.

        Parameters
        ----------
        family: string
            One of "bimodal_sine", "uniform5d" or "decay_series".

        Returns
        -------
        params: dictionary
            Keyword arguments accepted by the family's generator.
        """
        if family == 'bimodal_sine':
                return {
                        'x_low': 0.0,
                        'x_high': 10.0,
                        'amplitude': 5.0,
                        'frequency': 1.0,
                        'noise': 1.0,
                        'flip': 0.2,
                        }
        if family == 'uniform5d':
                return {
                        'widths': (2.0, 4.0, 8.0, 16.0, 32.0),
                        'y_dim': 5,
                        }
        if family == 'decay_series':
                return {
                        'n_lags': 7,
                        'decay': 0.5,
                        'noise': 1.0,
                        'burn_in': 50,
                        }
        raise ValueError(f"unknown synthetic family {family!r}; expected one of {', '.join(SYNTHETIC_FAMILIES)}")
