import pandas as pd


def describe_menu(menu):
    """Prints out the contracts with the settings that reproduce them."""
    print('Contracts\n' + '-' * 9, end='\n')
    print(menu.to_string(), end='\n\n\n')

    adversary_gain = menu.solve_settings.get('adversary_gain')
    revenue = pd.Series({
        'honest_revenue': menu.solve_settings.get('honest_revenue'),
        'adversary_gain': adversary_gain,
        'distinct_contracts': len(menu.drop_duplicates()),
    }).dropna()

    print('Summary\n' + '-' * 7, end='\n')
    print(revenue.to_string(), end='\n\n\n')

    settings = {'gamma': menu.gamma}
    settings.update(menu.solve_settings)
    for key in ['honest_revenue', 'adversary_gain']: settings.pop(key, None)
    settings = pd.Series(settings, dtype='object')
    settings.sort_index(inplace=True)

    print('Settings\n' + '-' * 8, end='\n')
    print(settings.to_string(), end='\n\n')
