from django.db import migrations, models


class Migration(migrations.Migration):

    dependencies = [
        ('diffusion', '0001_initial'),
    ]

    operations = [
        migrations.AlterField(
            model_name='trainingrun',
            name='profile',
            field=models.CharField(choices=[('smoke', 'Smoke'), ('desk', 'Desk'), ('full', 'Full'), ('paper', 'Full (alias)')], default='desk', max_length=20),
        ),
    ]
